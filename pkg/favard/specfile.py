"""Matrix description files (JSON) and their validation."""

import hashlib
import json
import re
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from favard.bandmat import BandedMatrix, from_factors
from favard.exceptions import SpecFileError
from favard.jacobi import JacobiMatrix
from favard.mixedmop import InitialConditions, darboux_initial_conditions

_OFFSET = re.compile(r"^[+-]?\d+$")
_MAX_LENGTH = 4096


class NuEntries(BaseModel):
    """Free entries of the 3x3 initial condition matrix."""
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    nu11: float = 0.0
    nu12: float = 0.0
    nu22: float = 0.0


class XiEntries(BaseModel):
    """Free entry of the 2x2 initial condition matrix."""
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    xi1: float = 0.0


class MatrixSpecFile(BaseModel):
    """A semi-infinite matrix known on its leading ``n_max`` rows and columns.

    ``jacobi`` and ``banded23`` files give diagonals keyed by offset ("-3" ..
    "+2"); ``pbf-factors`` files give the bidiagonal factor entries of
    L_1 L_2 L_3 Delta U_2 U_1.

    ``"initial_conditions": "darboux"`` (pbf-factors only) replaces ``nu`` and
    ``xi`` by the factor-derived conditions that keep every weight positive.
    """
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    kind: Literal["jacobi", "banded23", "pbf-factors"]
    n_max: int = Field(validation_alias=AliasChoices("n_max", "N_max"), ge=1, le=_MAX_LENGTH)
    bands: Optional[Dict[str, List[float]]] = None
    lowers: Optional[List[List[float]]] = None
    delta: Optional[List[float]] = None
    uppers: Optional[List[List[float]]] = None
    shift: float = 0.0
    nu: Optional[NuEntries] = None
    xi: Optional[XiEntries] = None
    initial_conditions_mode: Literal["given", "darboux"] = Field(
        default="given", validation_alias=AliasChoices("initial_conditions", "initial_conditions_mode")
    )

    @field_validator("bands")
    @classmethod
    def normalize_offsets(cls, v: Optional[Dict[str, List[float]]]) -> Optional[Dict[str, List[float]]]:
        """Canonical keys "-3", "-1", "0", "+1", ..."""
        if v is None:
            return v
        normalized = {}
        for key, values in v.items():
            if not _OFFSET.match(key.strip()):
                raise ValueError(f"diagonal key {key!r} is not an integer offset")
            offset = int(key)
            canonical = "0" if offset == 0 else f"{offset:+d}"
            if canonical in normalized:
                raise ValueError(f"diagonal {canonical} given twice")
            normalized[canonical] = values
        return dict(sorted(normalized.items(), key=lambda item: int(item[0])))

    @model_validator(mode="after")
    def check_kind(self) -> "MatrixSpecFile":
        if self.kind == "pbf-factors":
            self._check_factors()
        else:
            self._check_bands()
        if self.initial_conditions_mode == "darboux":
            if self.kind != "pbf-factors":
                raise ValueError("darboux initial conditions require kind 'pbf-factors'")
            if self.nu is not None or self.xi is not None:
                raise ValueError("darboux initial conditions replace 'nu' and 'xi'; give one or the other")
        return self

    def _check_bands(self) -> None:
        if self.lowers is not None or self.delta is not None or self.uppers is not None:
            raise ValueError(f"kind '{self.kind}' takes 'bands', not factor lists")
        if not self.bands:
            raise ValueError(f"kind '{self.kind}' requires 'bands'")
        low, high = (-1, 1) if self.kind == "jacobi" else (-3, 2)
        for key, values in self.bands.items():
            offset = int(key)
            if not low <= offset <= high:
                raise ValueError(f"diagonal {key} outside offsets {low:+d}..{high:+d}")
            required = max(self.n_max - abs(offset), 0)
            if len(values) != required:
                raise ValueError(f"diagonal {key} has {len(values)} entries, n_max requires {required}")
        if self.kind == "jacobi":
            for needed in ("0", "-1"):
                if needed not in self.bands:
                    raise ValueError(f"jacobi file requires diagonal {needed}")
            if any(v != 1.0 for v in self.bands.get("+1", [])):
                raise ValueError("jacobi superdiagonal must be all ones")
            for index, ell in enumerate(self.bands["-1"], start=1):
                if not ell > 0:
                    raise ValueError(f"subdiagonal ell[{index}] = {ell!r} must be positive")
        else:
            for needed in ("-3", "+2"):
                if self.n_max > abs(int(needed)) and needed not in self.bands:
                    raise ValueError(f"banded23 file requires extreme diagonal {needed}")

    def _check_factors(self) -> None:
        if self.bands is not None:
            raise ValueError("kind 'pbf-factors' takes factor lists, not 'bands'")
        if self.lowers is None or self.delta is None or self.uppers is None:
            raise ValueError("pbf-factors file requires 'lowers', 'delta' and 'uppers'")
        if len(self.lowers) != 3 or len(self.uppers) != 2:
            raise ValueError("pbf-factors file needs 3 lower and 2 upper factors")
        if len(self.delta) != self.n_max:
            raise ValueError(f"delta has {len(self.delta)} entries, n_max requires {self.n_max}")
        named = [(f"lowers[{k}]", g) for k, g in enumerate(self.lowers)]
        named += [(f"uppers[{j}]", g) for j, g in enumerate(self.uppers)]
        for name, entries in named:
            if len(entries) != self.n_max - 1:
                raise ValueError(f"{name} has {len(entries)} entries, n_max requires {self.n_max - 1}")
        for name, entries in named + [("delta", self.delta)]:
            for index, value in enumerate(entries):
                if not value > 0:
                    raise ValueError(f"{name}[{index}] = {value!r} must be strictly positive")

    @property
    def is_jacobi(self) -> bool:
        return self.kind == "jacobi"

    def build_matrix(self) -> Union[JacobiMatrix, BandedMatrix]:
        """The described matrix with the optional diagonal shift applied."""
        if self.kind == "jacobi":
            matrix = JacobiMatrix(m=self.bands["0"], ell=[1.0] + self.bands["-1"], n_max=self.n_max)
        elif self.kind == "banded23":
            bands = {int(key): values for key, values in self.bands.items()}
            matrix = BandedMatrix(p=2, q=3, bands=bands, n_max=self.n_max)
        else:
            matrix = from_factors(self.lowers, self.delta, self.uppers, self.n_max)
        return matrix.shift(self.shift) if self.shift else matrix

    def initial_conditions(self) -> InitialConditions:
        if self.initial_conditions_mode == "darboux":
            return darboux_initial_conditions(from_factors(self.lowers, self.delta, self.uppers, self.n_max))
        nu = self.nu or NuEntries()
        xi = self.xi or XiEntries()
        return InitialConditions(nu11=nu.nu11, nu12=nu.nu12, nu22=nu.nu22, xi1=xi.xi1)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude_none=True), indent=2) + "\n"


def parse_spec_text(text: str, path: str = "<string>") -> MatrixSpecFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(path, exc.msg, line=exc.lineno) from exc
    try:
        return MatrixSpecFile.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise SpecFileError(path, first["msg"], field=field) from exc


def parse_input(path: Union[str, Path]) -> MatrixSpecFile:
    """Read and validate a matrix description file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SpecFileError(str(path), f"cannot read file: {exc}") from exc
    return parse_spec_text(text, str(path))


def input_digest(path: Union[str, Path]) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()
