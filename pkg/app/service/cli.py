"""
Command-line driver: solve, sweep, coeffs, table and mesh subcommands.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 lookup above a calibrated mu range.
"""

from pathlib import Path
from typing import List, Optional, Sequence
import argparse
import json
import logging
import math
import sys

import numpy as np

from app.core.analysis import SweepRow, coefficient_sweep, trunc_coeffs_printed
from app.core.assembly import solve_problem
from app.core.errors import (
    ConfigError,
    HelmholtzError,
    MeshError,
    MuTableError,
    OutOfCalibrationError,
)
from app.core.fdstencil import parse_scheme
from app.core.mesh import ElementKind, load_mesh, save_mesh, write_vtk
from app.core.mu_table import dump_table, get_mu_table, lookup_mu
from app.core.presets import PRESETS, get_preset
from app.core.problem import DirichletKind, Method, PlaneWaveConvention
from app.core.verify import (
    DEFAULT_SWEEP_METHODS,
    ExactKind,
    ExactSolution,
    compare_to_reference,
    error_inf,
    pollution_sweep,
    reference_solve,
    theta_sweep,
)
from app.service.schemas import C2Form, RunConfig, SolveSummary, Subcommand, SweepKind
from app.service.writers import output_path, write_coeffs_csv, write_summary, write_sweep_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CALIBRATION = 4


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run manifest; flags override its values")
    parser.add_argument("--threads", type=int, help="Worker threads (0 = all cores)")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--output-dir", dest="output_dir", help="Directory for artifacts")
    parser.add_argument("--output", help="Explicit output file")


def _problem_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--c", type=float, help="Wave number")
    parser.add_argument("--ch", type=float, help="Wave number times mesh size")
    parser.add_argument("--theta", type=float, help="Plane-wave direction in radians")
    parser.add_argument("--n-s", dest="n_s", type=int, help="Sub-mesh nodes per edge")
    parser.add_argument("--mu-table", dest="mu_table", help="Alternative mu table file")
    parser.add_argument("--clamp-mu", dest="clamp_mu", action="store_true", default=None,
                        help="Clamp mu above the calibrated range instead of failing")
    parser.add_argument("--convention", choices=[c.value for c in PlaneWaveConvention],
                        help="Plane-wave form: dirichlet = sin(cx sin t + cy cos t)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ab-helmholtz",
        description="Adapted-bubbles Helmholtz solver and verification studies",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  ab-helmholtz solve --preset dirichlet-planewave --method ab --c 157.08 --ch 0.7
  ab-helmholtz sweep --methods galerkin ab --c-list 25 50 100 200 --ch 0.625
  ab-helmholtz coeffs --scheme fourth-order
  ab-helmholtz table --kind tri --key 0.62
  ab-helmholtz mesh --preset lshape --c 20
        """,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    solve = sub.add_parser("solve", help="Solve one preset problem; writes VTK and a JSON summary")
    _common(solve)
    _problem_flags(solve)
    solve.add_argument("--preset", choices=sorted(PRESETS))
    solve.add_argument("--cells", type=int,
                       help="Cells per unit length of a structured preset (neumann-strip, lshape-quad)")
    solve.add_argument("--method", choices=[m.value for m in Method])
    solve.add_argument("--robin-coefficient", dest="robin_coefficient", type=complex,
                       help="beta in du/dn = beta*u (e.g. 1j)")
    solve.add_argument("--reference", action="store_true", default=None,
                       help="Also compare against a fine-mesh Galerkin reference")
    solve.add_argument("--no-vtk", dest="vtk", action="store_false", default=None)

    sweep = sub.add_parser("sweep", help="Pollution or direction sweep on the equilateral domain")
    _common(sweep)
    _problem_flags(sweep)
    sweep.add_argument("--kind", dest="sweep_kind", choices=[k.value for k in SweepKind])
    sweep.add_argument("--methods", nargs="+", help=f"Columns (default {' '.join(DEFAULT_SWEEP_METHODS)})")
    sweep.add_argument("--method", help="Method of a theta sweep")
    sweep.add_argument("--c-list", dest="c_list", nargs="+", type=float)
    sweep.add_argument("--thetas", nargs="+", type=float)
    sweep.add_argument("--timings", action="store_true", default=None,
                       help="Fill the timing columns (output is no longer reproducible)")

    coeffs = sub.add_parser("coeffs", help="Truncation coefficients C1/C2 over a ch grid")
    _common(coeffs)
    coeffs.add_argument("--scheme", choices=["galerkin", "pseudo-rfb", "pseudo-ab", "fourth-order"])
    coeffs.add_argument("--mu", type=float, help="mu of the pseudo-ab scheme")
    coeffs.add_argument("--theta", type=float)
    coeffs.add_argument("--ch-grid", dest="ch_grid", nargs="+", type=float)
    coeffs.add_argument("--ch-min", dest="ch_min", type=float)
    coeffs.add_argument("--ch-max", dest="ch_max", type=float)
    coeffs.add_argument("--ch-steps", dest="ch_steps", type=int)
    coeffs.add_argument("--form", dest="c2_form", choices=[f.value for f in C2Form])
    coeffs.add_argument("--h", type=float, help="Mesh size used by the printed form")

    table = sub.add_parser("table", help="Dump a mu table or look up one key")
    _common(table)
    table.add_argument("--kind", choices=["tri", "quad"])
    table.add_argument("--key", type=float)
    table.add_argument("--mu-table", dest="mu_table")
    table.add_argument("--clamp-mu", dest="clamp_mu", action="store_true", default=None)

    mesh = sub.add_parser("mesh", help="Generate a preset mesh or validate a mesh file")
    _common(mesh)
    mesh.add_argument("--preset", choices=sorted(PRESETS))
    mesh.add_argument("--c", type=float)
    mesh.add_argument("--ch", type=float)
    mesh.add_argument("--cells", type=int, help="Cells per unit length of a structured preset")
    mesh.add_argument("--input", help="Mesh text file to validate")
    mesh.add_argument("--no-vtk", dest="vtk", action="store_false", default=None)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    return RunConfig.load(args.config, **overrides)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _spec_overrides(config: RunConfig) -> dict:
    over = {"n_s": config.n_s, "clamp_mu": config.clamp_mu, "mu_table_path": config.mu_table}
    if config.robin_coefficient is not None:
        over["robin_coefficient"] = config.robin_coefficient
    return over


def _run_solve(config: RunConfig) -> SolveSummary:
    preset = get_preset(config.preset)
    c, ch = preset.resolve(config.c, config.ch, config.cells)
    mesh = preset.build_mesh(c, ch)
    spec = preset.spec(c, config.theta, config.method, **_spec_overrides(config))
    if spec.dirichlet.kind is DirichletKind.PLANE_WAVE:
        spec = spec.model_copy(
            update={"dirichlet": spec.dirichlet.model_copy(update={"convention": config.convention})}
        )

    sol = solve_problem(mesh, spec, threads=config.threads)
    u = sol.nodal_values
    fields = {"u": u}
    summary = dict(
        preset=preset.name,
        method=spec.method.value,
        c=c,
        ch=ch,
        theta=spec.dirichlet.theta,
        n_nodes=mesh.n_nodes,
        n_elements=mesh.n_elements,
        n_unknowns=sol.stats.n_unknowns,
        u_max=float(u.real.max()),
        u_min=float(u.real.min()),
        assembly_ms=sol.stats.assembly_ms,
        solve_ms=sol.stats.solve_ms,
    )

    exact = ExactSolution.from_spec(spec)
    if exact.kind is not ExactKind.NONE:
        exact_nodes = exact(mesh.nodes[:, 0], mesh.nodes[:, 1])
        fields["exact"] = exact_nodes
        report = error_inf(sol, exact)
        summary.update(
            exact_max=float(exact_nodes.max()),
            exact_min=float(exact_nodes.min()),
            inf_error=report.inf_norm,
            rel_error=report.rel_inf,
        )

    if config.reference:
        if preset.fixed_h is not None:
            raise ConfigError(f"preset {preset.name} has a fixed mesh; no finer reference exists")
        ch_ref = preset.reference_ch or ch / 4.0
        ref = reference_solve(spec, preset.build_mesh, ch_ref, threads=config.threads)
        summary["reference_error"] = compare_to_reference(sol, ref).inf_norm

    stem = f"{preset.name}_{spec.method.value}"
    if config.vtk:
        vtk_path = Path(config.output_dir) / f"{stem}.vtk"
        vtk_path.parent.mkdir(parents=True, exist_ok=True)
        write_vtk(vtk_path, mesh, fields)
        summary["vtk_path"] = str(vtk_path)

    result = SolveSummary(**summary)
    write_summary(output_path(config.output_dir, config.output, f"{stem}.json"), result)
    print(result.model_dump_json(indent=2))
    return result


def _run_sweep(config: RunConfig) -> Path:
    ch = config.ch if config.ch is not None else 0.625
    theta = config.theta if config.theta is not None else 0.0
    options = dict(
        convention=config.convention,
        n_s=config.n_s,
        clamp_mu=config.clamp_mu,
        mu_table_path=config.mu_table,
    )
    if config.sweep_kind is SweepKind.POLLUTION:
        records = pollution_sweep(
            config.methods, ch, theta, config.c_list,
            threads=config.threads, timings=config.timings, **options,
        )
        default_name = "pollution.csv"
    else:
        c = config.c if config.c is not None else 50.0
        records = theta_sweep(
            config.method.value, c, ch, config.thetas,
            threads=config.threads, timings=config.timings, **options,
        )
        default_name = f"theta_{config.method.value}.csv"

    failed = [r for r in records if math.isnan(r.inf_error)]
    if failed:
        logger.warning(f"{len(failed)} of {len(records)} sweep cells failed")
    return write_sweep_csv(output_path(config.output_dir, config.output, default_name), records)


def _run_coeffs(config: RunConfig) -> Path:
    scheme = parse_scheme(config.scheme.value, config.mu)
    theta = config.theta if config.theta is not None else 0.0
    grid: Sequence[float] = (
        config.ch_grid
        if config.ch_grid is not None
        else np.linspace(config.ch_min, config.ch_max, config.ch_steps).tolist()
    )

    if config.c2_form is C2Form.NORMALIZED:
        rows = coefficient_sweep(scheme, theta, grid)
    else:
        if config.h is None:
            raise ConfigError("the printed C2 form needs a mesh size (--h)")
        rows = []
        for ch in grid:
            c = ch / config.h
            coeffs = trunc_coeffs_printed(scheme.alpha2(c, config.h), c, config.h, theta)
            rows.append(SweepRow(float(ch), coeffs.c1, coeffs.c2, coeffs.beta))

    name = f"coeffs_{config.scheme.value}_{config.c2_form.value}.csv"
    return write_coeffs_csv(output_path(config.output_dir, config.output, name), scheme.label, theta, rows)


def _run_table(config: RunConfig) -> str:
    table = get_mu_table(ElementKind(config.kind), config.mu_table)
    if config.key is not None:
        mu, n_s = lookup_mu(table, config.key, clamp=config.clamp_mu)
        text = json.dumps({"kind": config.kind, "key": config.key, "mu": mu, "n_s": n_s})
    else:
        text = dump_table(table)
    if config.output:
        Path(config.output).write_text(text if text.endswith("\n") else text + "\n")
    print(text.rstrip("\n"))
    return text


def _run_mesh(config: RunConfig) -> Path:
    if config.input:
        mesh = load_mesh(config.input)
        stem = Path(config.input).stem
    else:
        preset = get_preset(config.preset)
        c, ch = preset.resolve(config.c, config.ch, config.cells)
        mesh = preset.build_mesh(c, ch)
        stem = preset.name

    out = output_path(config.output_dir, config.output, f"{stem}.mesh")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_mesh(mesh, out)
    if config.vtk:
        write_vtk(out.with_suffix(".vtk"), mesh)
    print(
        json.dumps(
            {
                "nodes": mesh.n_nodes,
                "elements": mesh.n_elements,
                "kind": mesh.kind.value,
                "boundary_edges": int(mesh.boundary_edges.shape[0]),
                "path": str(out),
            }
        )
    )
    return out


HANDLERS = {
    Subcommand.SOLVE: _run_solve,
    Subcommand.SWEEP: _run_sweep,
    Subcommand.COEFFS: _run_coeffs,
    Subcommand.TABLE: _run_table,
    Subcommand.MESH: _run_mesh,
}


def run(config: RunConfig) -> int:
    """Execute one configured command and map failures to exit codes"""
    logging.getLogger().setLevel(config.log_level)
    try:
        HANDLERS[config.subcommand](config)
    except OutOfCalibrationError as e:
        logger.error(f"Out of calibration: {e}", exc_info=True)
        return EXIT_CALIBRATION
    except (ConfigError, MeshError, MuTableError) as e:
        logger.error(f"Invalid input for {config.subcommand.value}: {e}", exc_info=True)
        return EXIT_CONFIG
    except HelmholtzError as e:
        logger.error(f"Numerical failure in {config.subcommand.value}: {e}", exc_info=True)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as e:
        logger.error(f"Invalid request for {config.subcommand.value}: {e}", exc_info=True)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
