"""Command line front end: ``favard COMMAND SPEC_FILE [options]``.

Exit codes: 0 success, 1 usage or input error, 2 mathematical verdict
failure (a numerical error or a failed check).
"""

import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from structlog import get_logger

from favard import bandmat, jacobi, mixedmop, momentlab
from favard.config import get_tolerance, settings
from favard.exceptions import (
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERDICT,
    EigenSolverError,
    FavardError,
    InputError,
    exit_code_for,
    log_error_with_context,
)
from favard.logging_setup import configure_logging
from favard.mixedmop import InitialConditions
from favard.report import Report, emit_report
from favard.specfile import input_digest, parse_input
from favard.verification import SUITES, VerificationAgent

logger = get_logger()


def _tolerance(tol: Optional[float], name: str) -> float:
    return tol if tol is not None else get_tolerance(name)


def _default_order(matrix, N: Optional[int]) -> int:
    return matrix.n_max - 1 if N is None else N


def _matrix_rows(M: np.ndarray) -> List[List[float]]:
    return np.asarray(M).tolist()


def _factorize(report: Report, matrix, ic: InitialConditions, N: Optional[int] = None,
               tol: Optional[float] = None, **_) -> None:
    N = _default_order(matrix, N)
    report.arguments["N"] = N
    M = matrix.truncate(N)
    F = bandmat.neville_factorize(M, matrix.p, matrix.q)
    verdict = bandmat.is_oscillatory(M)

    report.payload = {
        "N": N,
        "p": F.p,
        "q": F.q,
        "positive": F.positive,
        "delta": F.delta,
        "lowers": [list(g) for g in F.lowers],
        "uppers": [list(g) for g in F.uppers],
        "violations": list(F.violations),
        "oscillatory": verdict.to_dict(),
    }
    report.tables["factors"] = (
        [{"factor": f"L{k + 1}", "index": i, "value": v} for k, g in enumerate(F.lowers) for i, v in enumerate(g)]
        + [{"factor": "Delta", "index": i, "value": v} for i, v in enumerate(F.delta)]
        + [{"factor": f"U{j + 1}", "index": i, "value": v} for j, g in enumerate(F.uppers) for i, v in enumerate(g)]
    )
    report.add_verdict("reassembly", F.residual, _tolerance(tol, "reassembly"))


def _shift(report: Report, matrix, ic: InitialConditions, N: Optional[int] = None, **_) -> None:
    N = _default_order(matrix, N)
    report.arguments["N"] = N
    s = bandmat.find_oscillatory_shift(matrix, N)
    shifted = matrix.truncate(N) + s * np.eye(N + 1)

    report.payload = {"N": N, "shift": s, "oscillatory": bandmat.is_oscillatory(shifted).to_dict()}
    if isinstance(matrix, jacobi.JacobiMatrix):
        bound = jacobi.shift_bound(matrix, range(N + 1))
        report.payload["negative_eigenvalue_bound"] = bound
        resolution = settings["SHIFT_RESOLUTION_FACTOR"] * (1 + matrix.norm1(N))
        report.add_flag("within_jacobi_bound", s <= bound + resolution)
    report.add_flag("positive_after_shift", bandmat.neville_factorize(shifted, matrix.p, matrix.q).positive)


def _spectrum(report: Report, matrix, ic: InitialConditions, N: int, tol: Optional[float] = None, **_) -> None:
    if isinstance(matrix, jacobi.JacobiMatrix):
        data = jacobi.spectral_data(matrix, N, strict=False)
        report.payload = {"N": N, "eigenvalues": data.lambdas, "masses": data.masses}
        report.tables["eigenvalues"] = [
            {"k": k, "lambda": lam, "mass": m, "golub_welsch": g}
            for k, (lam, m, g) in enumerate(zip(data.lambdas, data.masses, data.golub_welsch))
        ]
        report.add_verdict("mass_agreement", data.mass_residual, _tolerance(tol, "mass_agreement"))
        return

    spec_data = mixedmop.truncation_spectrum(matrix, N, ic, strict=False)
    report.payload = {
        "N": N,
        "alpha": spec_data.alpha,
        "beta": spec_data.beta,
        "eigenvalues": spec_data.lambdas,
        "mu": spec_data.mu,
        "rho": spec_data.rho,
    }
    report.tables["eigenvalues"] = [
        {
            "k": k,
            "lambda": lam,
            **{f"mu_{a + 1}": spec_data.mu[k, a] for a in range(3)},
            **{f"rho_{b + 1}": spec_data.rho[k, b] for b in range(2)},
        }
        for k, lam in enumerate(spec_data.lambdas)
    ]
    identity_tol = _tolerance(tol, "identity_residual")
    report.add_verdict("uw_identity", spec_data.uw_residual, identity_tol)
    report.add_verdict("power_identity", spec_data.power_residual, identity_tol)
    report.add_verdict("eigen_equation", spec_data.eigen_residual, identity_tol)
    report.add_verdict("projector_oracle", spec_data.projector_residual, _tolerance(tol, "cross_check"))


def _measure(report: Report, matrix, ic: InitialConditions, N: int, tol: Optional[float] = None, **_) -> None:
    if isinstance(matrix, jacobi.JacobiMatrix):
        data = jacobi.spectral_data(matrix, N, strict=False)
        nodes = data.lambdas[::-1]
        cumulative = jacobi.step_function(data, nodes)
        report.payload = {"N": N, "support": nodes, "total_mass": float(np.sum(data.masses))}
        report.tables["step"] = [
            {"x": x, "b": 1, "a": 1, "mass": m, "psi": c}
            for x, m, c in zip(nodes, data.masses[::-1], cumulative)
        ]
        report.add_verdict("total_mass", abs(float(np.sum(data.masses)) - 1.0), _tolerance(tol, "cross_check"))
        report.add_flag("positive", bool(np.all(data.masses > 0)))
        return

    spec_data = mixedmop.truncation_spectrum(matrix, N, ic, strict=False)
    dm = mixedmop.discrete_measure(spec_data, strict=False)
    nodes = dm.support[::-1]
    steps = dm.step(nodes)
    masses = dm.weights[::-1]
    report.payload = {
        "N": N,
        "support": nodes,
        "total_mass": dm.total_mass,
        "bound": dm.bound,
        "positive": dm.positive,
        "nonpositive": dm.nonpositive_weights(),
    }
    report.tables["step"] = [
        {"x": x, "b": b, "a": a, "mass": masses[i, b - 1, a - 1], "psi": steps[i, b - 1, a - 1]}
        for i, x in enumerate(nodes)
        for b in (1, 2)
        for a in (1, 2, 3)
    ]
    report.add_verdict("bound_identity", dm.mass_residual, _tolerance(tol, "cross_check"))


def _weyl(report: Report, matrix, ic: InitialConditions, N: int, z: complex,
          tol: Optional[float] = None, **_) -> None:
    report.arguments["z"] = [z.real, z.imag]
    if isinstance(matrix, jacobi.JacobiMatrix):
        result = jacobi.weyl(matrix, N, z)
        report.payload = {"N": N, "z": z, "S": result.value, "partial_fraction": result.partial_fraction}
    else:
        result = momentlab.weyl_matrix(matrix, N, ic, z, strict=False)
        report.payload = {"N": N, "z": z, "S": result.S, "partial_fraction": result.partial_fraction}
        report.tables["S"] = [
            {"b": b, "a": a, "re": result.S[b - 1, a - 1].real, "im": result.S[b - 1, a - 1].imag}
            for b in (1, 2)
            for a in (1, 2, 3)
        ]
    report.add_verdict("weyl_routes", result.residual, _tolerance(tol, "weyl_routes"))


def _moments(report: Report, matrix, ic: InitialConditions, n: int, **_) -> None:
    if isinstance(matrix, jacobi.JacobiMatrix):
        values = [jacobi.moments(matrix, k) for k in range(n + 1)]
        report.payload = {"n": n, "moments": values}
        report.tables["moments"] = [{"n": k, "b": 1, "a": 1, "value": v} for k, v in enumerate(values)]
        return

    psi = momentlab.moment_sequence(matrix, n + 1, ic)
    report.payload = {"n": n, "moments": [_matrix_rows(p) for p in psi]}
    report.tables["moments"] = [
        {"n": k, "b": b, "a": a, "value": p[b - 1, a - 1]}
        for k, p in enumerate(psi)
        for b in (1, 2)
        for a in (1, 2, 3)
    ]


def _quadrature(report: Report, matrix, ic: InitialConditions, N: int, **_) -> None:
    if isinstance(matrix, jacobi.JacobiMatrix):
        checks = {(1, 1): jacobi.quadrature_check(matrix, N)}
    else:
        checks = momentlab.quadrature_table(matrix, ic, N)

    rows = []
    for (b, a), check in checks.items():
        rows.append({
            "b": b,
            "a": a,
            "degree": check.degree,
            "observed": check.observed,
            "exact": check.exact,
            "optimality_residual": check.optimality_residual,
            "optimal": check.optimal,
        })
        report.add_flag(f"exact_b{b}_a{a}", check.exact, f"degree {check.degree}, observed {check.observed}")
    report.payload = {"N": N, "degrees": {f"{b},{a}": c.degree for (b, a), c in checks.items()}}
    report.tables["quadrature"] = rows


def _verify(report: Report, matrix, ic: InitialConditions, N: int, suites: Sequence[str] = (),
            tol: Optional[float] = None, seed: Optional[int] = None, **_) -> None:
    seed = settings["SEED"] if seed is None else seed
    requested = list(SUITES) if "all" in suites else list(suites)
    report.arguments.update({"suites": requested, "seed": seed})
    if not requested:
        return

    summary = VerificationAgent(tolerance=tol, seed=seed).run(matrix, ic, N, requested)
    report.payload = summary
    for result in summary["results"]:
        report.add_flag(result["type"], result["status"] in ("PASS", "SKIP"), result["message"])


COMMANDS: Dict[str, Callable[..., None]] = {
    "factorize": _factorize,
    "shift": _shift,
    "spectrum": _spectrum,
    "measure": _measure,
    "weyl": _weyl,
    "moments": _moments,
    "quadrature": _quadrature,
    "verify": _verify,
}


def _load(spec_file: Path) -> Tuple[Any, InitialConditions]:
    spec = parse_input(spec_file)
    return spec.build_matrix(), spec.initial_conditions()


def run_command(spec_file: Path, command: str, **options) -> Report:
    """Build the report of ``command`` on the matrix described by ``spec_file``.

    Options are the command's flags by name (``N``, ``n``, ``z``, ``tol``,
    ``seed``, ``suites``); ``None`` values fall back to the defaults.
    """
    if command not in COMMANDS:
        raise InputError(
            message=f"Unknown command {command!r}",
            error_code="UNKNOWN_COMMAND",
            details={"command": command, "known": list(COMMANDS)},
        )
    spec_file = Path(spec_file)
    matrix, ic = _load(spec_file)
    report = Report(
        command=command,
        arguments={k: v for k, v in options.items() if v is not None and k != "suites"},
        input_digest=input_digest(spec_file),
    )
    COMMANDS[command](report, matrix, ic, **options)
    logger.info("command_completed", command=command, passed=report.passed)
    return report


class FavardGroup(click.Group):
    """Click group whose usage errors exit with 1 instead of click's 2."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise


class ComplexParam(click.ParamType):
    """``re,im`` or a bare real number."""

    name = "re,im"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        parts = str(value).split(",")
        try:
            if len(parts) == 1:
                z = complex(float(parts[0]), 0.0)
            elif len(parts) == 2:
                z = complex(float(parts[0]), float(parts[1]))
            else:
                raise ValueError(value)
        except ValueError:
            self.fail(f"{value!r} is not of the form re,im", param, ctx)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            self.fail(f"{value!r} is not finite", param, ctx)
        return z


COMPLEX = ComplexParam()


def common_options(command: Callable) -> Callable:
    options = [
        click.argument("spec_file", type=click.Path(dir_okay=False, path_type=Path)),
        click.option("--out", "out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Write the report here instead of stdout."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
                     help="Report format (default from runtime settings)."),
        click.option("--tol", "tol", type=click.FloatRange(min=0.0, min_open=True), default=None,
                     help="Override the tolerance of the command's checks."),
        click.option("--seed", "seed", type=int, default=None, help="Seed for randomized checks."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def report_command(command: Callable) -> Callable:
    """Run the named command, write its report and exit with the mapped code.

    Library errors become a JSON error document on stderr.
    """

    @functools.wraps(command)
    def wrapper(spec_file, out, fmt, **options):
        ctx = click.get_current_context()
        try:
            report = run_command(spec_file, ctx.info_name, **options)
        except FavardError as e:
            error = e
        except np.linalg.LinAlgError as e:
            error = EigenSolverError(str(e), -1)
        else:
            _finish(ctx, report, out, fmt)
            return
        log_error_with_context(logger, error, {"command": ctx.info_name})
        click.echo(json.dumps(error.to_dict(), default=str), err=True)
        ctx.exit(exit_code_for(error))

    return wrapper


def _finish(ctx: click.Context, report: Report, out: Optional[Path], fmt: Optional[str]) -> None:
    data = emit_report(report, fmt)
    if out is None:
        click.get_binary_stream("stdout").write(data)
    else:
        out.write_bytes(data)
    logger.info("report_written", command=report.command, passed=report.passed, out=str(out) if out else "-")
    if not report.passed:
        ctx.exit(EXIT_VERDICT)


@click.group(cls=FavardGroup)
@click.version_option(package_name="favardlab", prog_name="favard")
@click.option("--log-level", default=None, help="structlog level (default from runtime settings).")
def cli(log_level: Optional[str]) -> None:
    """Spectral Favard theory for banded matrices: factorizations, spectra,
    measures, Weyl functions, moments and verification suites."""
    configure_logging(log_level or settings["LOG_LEVEL"])


@cli.command()
@common_options
@click.option("--N", "N", type=int, default=None, help="Truncation order (default n_max - 1).")
@report_command
def factorize(**options):
    """Neville bidiagonal factorization of T^[N] and the oscillation verdict."""


@cli.command()
@common_options
@click.option("--N", "N", type=int, default=None, help="Truncation order (default n_max - 1).")
@report_command
def shift(**options):
    """Smallest diagonal shift giving T^[N] a positive bidiagonal factorization."""


@cli.command()
@common_options
@click.option("--N", "N", type=int, required=True, help="Truncation order.")
@report_command
def spectrum(**options):
    """Eigenvalues of T^[N] with masses (Jacobi) or Christoffel numbers (banded)."""


@cli.command()
@common_options
@click.option("--N", "N", type=int, required=True, help="Truncation order.")
@report_command
def measure(**options):
    """Step-function table of the discrete measure supported on the zeros."""


@cli.command()
@common_options
@click.option("--N", "N", type=int, required=True, help="Truncation order.")
@click.option("--z", "z", type=COMPLEX, required=True, help="Evaluation point re,im.")
@report_command
def weyl(**options):
    """Weyl function S^[N](z) of the truncation, by several routes."""


@cli.command()
@common_options
@click.option("--n", "n", type=click.IntRange(min=0), required=True, help="Highest moment index.")
@report_command
def moments(**options):
    """Moments Psi_0..Psi_n read off the powers of T."""


@cli.command()
@common_options
@click.option("--N", "N", type=int, required=True, help="Truncation order.")
@report_command
def quadrature(**options):
    """Degrees of precision d_{b,a}(N) and the observed exactness of the quadrature."""


@cli.command()
@common_options
@click.option("--N", "N", type=int, required=True, help="Truncation order.")
@click.option("--suite", "suites", multiple=True, type=click.Choice(sorted(SUITES) + ["all"]),
              help="Suite to run; repeat for several, 'all' for every suite.")
@report_command
def verify(**options):
    """Run verification suites on T^[N]."""


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point; returns the exit code instead of raising SystemExit."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        rv = cli.main(args=args, prog_name="favard", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK
