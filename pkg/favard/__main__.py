"""``python -m favard``."""

import sys

from favard.cli import main

sys.exit(main())
