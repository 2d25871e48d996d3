"""Run the verification suites over the seeded random ensembles and print a summary table."""
import sys
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from favard.config import settings  # noqa: E402
from favard.logging_setup import configure_logging  # noqa: E402
from favard.mixedmop import InitialConditions  # noqa: E402
from favard.verification import SUITES, VerificationAgent  # noqa: E402
from favard.verification.ensemble import iter_ensemble  # noqa: E402

STATUS_STYLE = {"PASS": "green", "SKIP": "yellow", "FAIL": "red", "ERROR": "bold red"}


def run_ensemble(kind: str, size: int, n_max: int, orders, seed: int):
    """Yield (instance, N, summary) for every matrix and order."""
    agent = VerificationAgent(seed=seed)
    for index, matrix in enumerate(iter_ensemble(kind, size, n_max, seed)):
        for N in orders:
            yield index, N, agent.run(matrix, InitialConditions(), N)


@click.command()
@click.option("--size", type=int, default=None, help="Matrices per ensemble (default from settings).")
@click.option("--seed", type=int, default=None, help="Ensemble seed (default from settings).")
@click.option("--orders", default="4,8,12", help="Comma separated truncation orders.")
def main(size, seed, orders):
    """Acceptance summary for the pbf and jacobi ensembles."""
    configure_logging(settings["LOG_LEVEL"])
    size = settings["ENSEMBLE_SIZE"] if size is None else size
    seed = settings["SEED"] if seed is None else seed
    orders = [int(part) for part in orders.split(",")]

    console = Console()
    table = Table(title=f"Verification suites (seed {seed}, {size} matrices per ensemble)")
    table.add_column("ensemble")
    table.add_column("instance", justify="right")
    table.add_column("N", justify="right")
    for name in SUITES:
        table.add_column(name)

    failures = 0
    for kind, n_max in (("pbf", 32), ("jacobi", 48)):
        for index, N, summary in run_ensemble(kind, size, n_max, orders, seed):
            statuses = {r["type"].removesuffix("_verification"): r["status"] for r in summary["results"]}
            cells = [f"[{STATUS_STYLE[s]}]{s}[/]" for s in (statuses[name] for name in SUITES)]
            table.add_row(kind, str(index), str(N), *cells)
            failures += summary["summary"]["failures"]

    console.print(table)
    if failures:
        console.print(f"[bold red]{failures} suite failures[/]")
        sys.exit(2)
    console.print("[green]All suites passed[/]")


if __name__ == "__main__":
    main()
