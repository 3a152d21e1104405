"""
CLI - Command-line front end.

    python -m novarch depth complex.json --lattice norm
    python -m novarch hpt complex.json
    python -m novarch ss complex.json
    python -m novarch tau flux.json
    python -m novarch rigidity model.json
    python -m novarch model cp1 --r 3/5 --n 6 | python -m novarch ss -

Every subcommand except `model` prints a RunReport; `model` prints a
complex document so it can be piped into the others. Exit codes: 0 ok,
1 math error or failed check, 2 usage, 3 io/parse.
"""

import sys
import time
from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import typer
from rich.console import Console

from novarch.algebra.matrix import LATTICES, NORM
from novarch.algebra.novikov import INF
from novarch.complexes.floer import FloerTypeComplex, validate_floer_type
from novarch.config import Settings, get_settings, to_fraction
from novarch.errors import MathError, NovarchError, UsageError
from novarch.flux.dual_cone import dual_cone
from novarch.flux.polytope import FluxPolytope, RelLattice, StarShape
from novarch.flux.tau import concavity_certificate, tau_eval
from novarch.io.documents import (
    ComplexDocument,
    RigidityInput,
    TauInput,
    document_from_complex,
    emit,
    load_json,
    parse_complex,
    validate_model,
)
from novarch.io.reports import RunReport, input_hash
from novarch.models.cp1 import cp1_family, cp1_limit_view, cp1_model
from novarch.models.polyvector import bv_as_complex, polyannulus_bv
from novarch.models.random_complex import random_floer_complex
from novarch.perturbation.depth import boundary_depth_def, boundary_depth_torsion
from novarch.perturbation.perturb import hpt_pipeline
from novarch.perturbation.sdr import SDR_IDENTITIES
from novarch.rigidity.affinoid import AffinoidModel
from novarch.rigidity.isomorphisms import (
    perturbation_close_to,
    random_unit_terms,
    rigidity_iso_annulus,
    rigidity_iso_laurent,
    rigidity_iso_polyannulus,
    rigidity_iso_tate,
)
from novarch.spectral.hausdorff import detect_hausdorff_failure
from novarch.spectral.pages import compute_pages, tau_from_ss
from novarch.utils.logger import configure_logging, get_logger

logger = get_logger(__name__)

SUBCOMMANDS = ("depth", "hpt", "ss", "tau", "rigidity", "model")
MODEL_FAMILIES = ("cp1", "polyannulus", "random")

Results = Tuple[Dict[str, Any], Dict[str, bool]]


def _fmt(value) -> str:
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    return str(value)


# -- handlers -----------------------------------------------------------------

def _fraction_arg(args: Dict[str, Any], key: str) -> Optional[Fraction]:
    """A rational flag value; malformed values are usage errors."""
    value = args.get(key)
    if value is None:
        return None
    try:
        return to_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--{key} is not a rational: {value!r}", witness=key) from exc


def _precision(args: Dict[str, Any], doc: Optional[ComplexDocument] = None) -> Fraction:
    precision = _fraction_arg(args, "precision")
    if precision is not None:
        if precision <= 0:
            raise UsageError("--precision must be positive", witness=str(precision))
        return precision
    if doc is not None:
        return to_fraction(doc.precision)
    return get_settings().precision


def _lattice(args: Dict[str, Any], default: str) -> str:
    lattice = args.get("lattice") or default
    if lattice not in LATTICES:
        raise UsageError(f"unknown lattice {lattice!r}", witness=",".join(LATTICES))
    return lattice


def _complex(args: Dict[str, Any], text: Optional[str]) -> Tuple[ComplexDocument, FloerTypeComplex]:
    if text is None:
        raise UsageError("this subcommand reads a complex document")
    doc = parse_complex(text, strict=not args.get("lax", False))
    c = doc.to_complex()
    hbar = _fraction_arg(args, "hbar")
    if hbar is not None:
        if hbar <= 0:
            raise UsageError("--hbar must be positive", witness=str(hbar))
        c = c.with_hbar(hbar)
    return doc, c


def run_depth(args: Dict[str, Any], text: Optional[str]) -> Results:
    doc, c = _complex(args, text)
    E = _precision(args, doc)
    lattice = _lattice(args, NORM)
    beta_def = boundary_depth_def(c, lattice, E)
    beta_torsion = boundary_depth_torsion(c, lattice, E)
    barcode = c.barcode(lattice, E)
    results = {
        "lattice": lattice,
        "beta": str(beta_def),
        "beta_def": str(beta_def),
        "beta_torsion": str(beta_torsion),
        "torsion": {str(k): [str(e) for e in v] for k, v in barcode.torsion.items()},
        "free": {str(k): v for k, v in barcode.free.items()},
    }
    return results, {"methods_agree": beta_def == beta_torsion}


def _cp1_view(doc: ComplexDocument, E: Fraction, state=None, transfer=None) -> Optional[Dict[str, Any]]:
    model = doc.model or {}
    if model.get("family") != "cp1":
        return None
    view = cp1_limit_view(cp1_model(model["r"], int(model["N"]), E), state, transfer)
    return view.model_dump()


def run_hpt(args: Dict[str, Any], text: Optional[str]) -> Results:
    doc, c = _complex(args, text)
    E = _precision(args, doc)
    lattice = _lattice(args, NORM)
    report = validate_floer_type(c, E)
    if not report.valid:
        v = report.first_violation
        return {"valid": False, "violation": v.model_dump()}, {"floer_type": False}
    result = hpt_pipeline(c, lattice, _fraction_arg(args, "epsilon"), E)
    G = c.unperturbed()
    bounds = {k: None if v is None else _fmt(v) for k, v in result.bounds.model_dump().items()}
    results = {
        "lattice": lattice,
        "beta": str(result.sdr.beta),
        "tau": _fmt(result.tau),
        "homology": list(result.sdr.homology.names),
        "d_def": result.d_def.to_triplets(),
        "series_terms": result.series_terms,
        "bounds": bounds,
        "method_agreement": boundary_depth_def(G, lattice, E) == boundary_depth_torsion(G, lattice, E),
        "sdr_check": all(result.checks[k] for k in SDR_IDENTITIES),
    }
    view = _cp1_view(doc, E, transfer=result)
    if view is not None:
        results["truncation_edge"] = view
    checks = dict(result.checks)
    checks["method_agreement"] = results["method_agreement"]
    return results, checks


def run_ss(args: Dict[str, Any], text: Optional[str]) -> Results:
    doc, c = _complex(args, text)
    E = _precision(args, doc)
    r_max = args.get("r_max")
    if r_max is not None and int(r_max) < 1:
        raise UsageError("--r-max must be at least 1", witness=str(r_max))
    state = compute_pages(c, r_max, E)
    results = state.summary()
    results["tau"] = _fmt(tau_from_ss(state))
    checks = dict(state.checks)

    diagnostic = None
    model = doc.model or {}
    if model.get("family") == "cp1":
        N = int(model["N"])
        diagnostic = detect_hausdorff_failure(cp1_family(model["r"], E), N + 4, N, 2)
        results["truncation_edge"] = _cp1_view(doc, E, state=state)
    elif doc.ray is not None and len(doc.ray.stages) >= 2:
        ray = doc.to_ray()
        diagnostic = detect_hausdorff_failure(lambda n: ray.stages[n - 1], len(ray), 1, 1)
    if diagnostic is not None:
        results["hausdorff"] = diagnostic.verdict.value
        results["hausdorff_classes"] = [t.model_dump(mode="json") for t in diagnostic.classes]
    return results, checks


def run_tau(args: Dict[str, Any], text: Optional[str]) -> Results:
    if text is None:
        raise UsageError("tau reads a flux document")
    data = validate_model(TauInput, load_json(text), not args.get("lax", False))
    L = RelLattice(data.m, tuple(data.w0), tuple(tuple(row) for row in data.boundary))
    results: Dict[str, Any] = {}
    checks: Dict[str, bool] = {}
    P = FluxPolytope(tuple(tuple(v) for v in data.polytope_vertices)) if data.polytope_vertices else None
    if data.classes:
        if P is None:
            raise UsageError("classes need polytope_vertices")
        f = tau_eval(data.classes, P, L)
        rng = np.random.default_rng(args.get("seed") if args.get("seed") is not None else get_settings().seed)
        certificate = concavity_certificate(f, rng, int(args.get("pairs") or 200))
        results["tau_pieces"] = f.to_dict()
        results["concave"] = certificate.holds
        results["certificate"] = certificate.model_dump()
        if data.at:
            results["values"] = {",".join(p): _fmt(f(p)) for p in data.at}
        checks["concave"] = certificate.holds
    if data.star is not None:
        star = StarShape(tuple(data.star.points), tuple(data.star.rays), tuple(data.star.full_lines))
    elif P is not None:
        star = StarShape.from_polytope(P)
    else:
        star = None
    if star is not None:
        cone = dual_cone(L, star)
        results["dual_cone"] = {
            "generators": [list(g) for g in cone.generators],
            "lineality": [list(g) for g in cone.lineality],
            "boundary_vanishes": cone.boundary_vanishes,
        }
    return results, checks


def _affinoid(data: RigidityInput) -> AffinoidModel:
    kind = data.kind
    if kind == "tate":
        return AffinoidModel.tate(data.n, data.degree, data.precision)
    if kind == "laurent":
        if data.r is None:
            raise UsageError("a Laurent domain needs r")
        return AffinoidModel.laurent(data.n, data.r, data.degree, data.precision)
    if not data.radii:
        raise UsageError(f"an {kind} model needs radii")
    if kind == "annulus" and len(data.radii) != 1:
        raise UsageError("an annulus has exactly one (r1, r2) pair")
    return AffinoidModel.polyannulus([tuple(r) for r in data.radii], data.degree, data.precision)


RIGIDITY = {
    "tate": rigidity_iso_tate,
    "annulus": rigidity_iso_annulus,
    "polyannulus": rigidity_iso_polyannulus,
    "laurent": rigidity_iso_laurent,
}


def run_rigidity(args: Dict[str, Any], text: Optional[str]) -> Results:
    if text is None:
        raise UsageError("rigidity reads a model document")
    data = validate_model(RigidityInput, load_json(text), not args.get("lax", False))
    A = _affinoid(data)
    terms = dict(data.twist.terms)
    if not terms and data.twist.seed is not None:
        terms = random_unit_terms(A, data.twist.seed)
    P = perturbation_close_to(A, data.twist.exponent, terms or None)
    iso = RIGIDITY[data.kind](A, P)
    results = iso.to_dict()
    checks = results.pop("checks")
    return results, checks


def _model_complex(family: str, args: Dict[str, Any], E: Fraction) -> Tuple[FloerTypeComplex, dict, Dict[str, bool]]:
    if family == "cp1":
        model = cp1_model(args.get("r") or "3/5", int(args.get("N") or 6), E)
        return model.complex, model.metadata(), {}
    if family == "polyannulus":
        n = int(args.get("n") or 1)
        bv = polyannulus_bv(n, None, int(args.get("N") or 1), args.get("seed"))
        return bv_as_complex(bv), {"family": "polyannulus", "n": n, "N": bv.N}, dict(bv.checks)
    c = random_floer_complex(args.get("seed"), int(args.get("rank") or 6), args.get("hbar") or 1,
                             args.get("beta") or 1)
    return c, {"family": "random", "seed": args.get("seed"), "rank": c.rank}, {}


def build_model(args: Dict[str, Any]) -> Tuple[ComplexDocument, Dict[str, bool]]:
    """
    Complex document for a model family, with its construction checks.

    Raises:
        UsageError: unknown family or out-of-range model flags
    """
    family = args.get("family")
    if family not in MODEL_FAMILIES:
        raise UsageError(f"unknown model family {family!r}", witness=",".join(MODEL_FAMILIES))
    E = _precision(args)
    try:
        c, metadata, checks = _model_complex(family, args, E)
        if args.get("hbar") is not None and family != "random":
            c = c.with_hbar(args["hbar"])
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc), witness=family) from exc
    checks["floer_type"] = validate_floer_type(c, E).valid
    return document_from_complex(c, E, metadata), checks


def run_model(args: Dict[str, Any], text: Optional[str]) -> Results:
    doc, checks = build_model(args)
    return {"document": doc.model_dump(by_alias=True, exclude_none=True)}, checks


HANDLERS: Dict[str, Callable[[Dict[str, Any], Optional[str]], Results]] = {
    "depth": run_depth,
    "hpt": run_hpt,
    "ss": run_ss,
    "tau": run_tau,
    "rigidity": run_rigidity,
    "model": run_model,
}


def _echo(name: str, args: Dict[str, Any]) -> List[str]:
    return [name] + [f"--{k}={v}" for k, v in sorted(args.items()) if v is not None and v is not False]


def run_subcommand(name: str, args: Optional[Dict[str, Any]] = None, input: Optional[str] = None) -> RunReport:
    """
    Run one subcommand and assemble its report; errors become report fields.

    Args:
        name: One of SUBCOMMANDS
        args: Flag values (precision, hbar, seed, lattice, lax, ...)
        input: Input document text

    Returns:
        RunReport whose exit_code is 0 only when no error occurred and every check passed
    """
    args = dict(args or {})
    report = RunReport(command=_echo(name, args), input_hash=input_hash(input))
    handler = HANDLERS.get(name)
    if handler is None:
        error = UsageError(f"unknown subcommand {name!r}", witness=",".join(SUBCOMMANDS))
        report.error, report.exit_code = error.to_dict(), error.exit_code
        return report
    started = time.perf_counter()
    try:
        results, checks = handler(args, input)
        report.results, report.checks = results, checks
    except NovarchError as exc:
        logger.debug("%s failed: %s", name, exc)
        report.error, report.exit_code = exc.to_dict(), exc.exit_code
    except (ValueError, ZeroDivisionError) as exc:
        # flag values were already checked, so these come from the mathematics
        logger.debug("%s failed: %s", name, exc)
        error = MathError(str(exc))
        report.error, report.exit_code = error.to_dict(), error.exit_code
    report.timing["total"] = time.perf_counter() - started
    if report.exit_code == 0 and not report.ok:
        report.exit_code = 1
        logger.warning("failed checks: %s", ", ".join(report.failed_checks()))
    return report


# -- typer application -----------------------------------------------------------

class OutputFormat(str, Enum):
    json = "json"
    table = "table"


app = typer.Typer(help="Non-Archimedean homological algebra over the Novikov field.", add_completion=False,
                  no_args_is_help=True)

InputArg = Annotated[str, typer.Argument(help="Input JSON file, '-' for stdin")]
PrecisionOpt = Annotated[Optional[str], typer.Option("--precision", help="Working precision E")]
HbarOpt = Annotated[Optional[str], typer.Option("--hbar", help="Override the hbar of the input")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Seed for sampled checks")]
FormatOpt = Annotated[OutputFormat, typer.Option("--format", help="json or table")]
LaxOpt = Annotated[bool, typer.Option("--lax", help="Tolerate unknown document fields")]
LatticeOpt = Annotated[Optional[str], typer.Option("--lattice", help="norm or relative")]


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        typer.echo(f"cannot read {path}: {exc.strerror}", err=True)
        raise typer.Exit(3)


def _finish(report: RunReport, output: OutputFormat) -> None:
    if output == OutputFormat.table:
        Console().print(report.to_table())
    else:
        typer.echo(report.to_json())
    raise typer.Exit(report.exit_code)


def _settings(precision: Optional[str]) -> Settings:
    settings = get_settings()
    configure_logging(settings.log_level)
    if precision is not None:
        try:
            settings = settings.with_overrides(precision=precision)
        except ValueError as exc:
            raise typer.BadParameter(str(exc), param_hint="--precision")
    return settings


def _flags(precision: Optional[str], lax: bool = False, **flags: Any) -> Dict[str, Any]:
    """Flag values with settings applied: a validated precision and NOVARCH_STRICT_SCHEMA."""
    settings = _settings(precision)
    args = dict(flags)
    args["precision"] = None if precision is None else str(settings.precision)
    args["lax"] = lax or not settings.strict_schema
    return args


@app.command()
def depth(path: InputArg = "-", lattice: LatticeOpt = None, precision: PrecisionOpt = None, hbar: HbarOpt = None,
          seed: SeedOpt = None, output: FormatOpt = OutputFormat.json, lax: LaxOpt = False):
    """Boundary depth by the definition and by the torsion barcode."""
    args = _flags(precision, lax, lattice=lattice, hbar=hbar, seed=seed)
    _finish(run_subcommand("depth", args, _read(path)), output)


@app.command()
def hpt(path: InputArg = "-", lattice: LatticeOpt = None, precision: PrecisionOpt = None, hbar: HbarOpt = None,
        seed: SeedOpt = None, output: FormatOpt = OutputFormat.json, lax: LaxOpt = False,
        epsilon: Annotated[Optional[str], typer.Option(help="Norm slack of the retraction")] = None):
    """Transfer the deformation to homology and report tau."""
    args = _flags(precision, lax, lattice=lattice, hbar=hbar, seed=seed, epsilon=epsilon)
    _finish(run_subcommand("hpt", args, _read(path)), output)


@app.command()
def ss(path: InputArg = "-", precision: PrecisionOpt = None, hbar: HbarOpt = None, seed: SeedOpt = None,
       output: FormatOpt = OutputFormat.json, lax: LaxOpt = False,
       r_max: Annotated[Optional[int], typer.Option("--r-max", help="Last page computed")] = None):
    """Spectral sequence pages, tau, and the Hausdorff diagnostic for families."""
    args = _flags(precision, lax, hbar=hbar, seed=seed, r_max=r_max)
    _finish(run_subcommand("ss", args, _read(path)), output)


@app.command()
def tau(path: InputArg = "-", precision: PrecisionOpt = None, seed: SeedOpt = None,
        output: FormatOpt = OutputFormat.json, lax: LaxOpt = False,
        pairs: Annotated[int, typer.Option(help="Midpoint pairs in the concavity test")] = 200):
    """tau_P over a flux polytope and dual cones of star shapes."""
    args = _flags(precision, lax, seed=seed, pairs=pairs)
    _finish(run_subcommand("tau", args, _read(path)), output)


@app.command()
def rigidity(path: InputArg = "-", precision: PrecisionOpt = None, seed: SeedOpt = None,
             output: FormatOpt = OutputFormat.json, lax: LaxOpt = False):
    """Isomorphism from the reference product to a close perturbed product."""
    args = _flags(precision, lax, seed=seed)
    _finish(run_subcommand("rigidity", args, _read(path)), output)


@app.command()
def model(family: Annotated[str, typer.Argument(help="cp1, polyannulus or random")],
          r: Annotated[Optional[str], typer.Option("--r", help="cp1 parameter in (0, 1)")] = None,
          n_trunc: Annotated[Optional[int], typer.Option("--n", help="Truncation N")] = None,
          dim: Annotated[Optional[int], typer.Option("--dim", help="Polyannulus dimension")] = None,
          rank: Annotated[Optional[int], typer.Option("--rank", help="Random complex rank")] = None,
          beta: Annotated[Optional[str], typer.Option("--beta", help="Random complex boundary depth")] = None,
          precision: PrecisionOpt = None, hbar: HbarOpt = None, seed: SeedOpt = None,
          output: FormatOpt = OutputFormat.json):
    """Emit a model as a complex document."""
    args = _flags(precision, family=family, r=r, N=n_trunc, n=dim, rank=rank, beta=beta, hbar=hbar, seed=seed)
    args.pop("lax")
    report = run_subcommand("model", args, None)
    if output == OutputFormat.json and report.exit_code == 0:
        doc = ComplexDocument.model_validate(report.results["document"])
        typer.echo(emit(doc), nl=False)
        raise typer.Exit(0)
    _finish(report, output)


def main() -> None:
    app()


if __name__ == "__main__":
    main()
