"""Command-line front end: preset runs, config files, CSV/JSON/SVG artifacts.

Configuration precedence is flags > environment > config file.  Environment:
SPINGUIDE_OUTPUT_DIR overrides the output directory, SPINGUIDE_WORKERS the
worker count.  Exit codes: 0 full success, 1 fatal error, 2 partial per-point
failures (the scan itself completed).
"""

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, cumulant, dicke, svgplot
from .coupling import WaveguideModel
from .exact import DimensionCapError
from .experiments import (
    Scenario,
    ScanPoint,
    TrajectorySet,
    dicke_rows_to_csv,
    get_preset,
    preset_catalog,
    records_to_csv,
    records_to_json,
    run_scan,
    run_trajectory_case,
    timeseries_to_csv,
    tsa_scaling,
)
from .ode import IntegratorConfig

ENV_OUTPUT = "SPINGUIDE_OUTPUT_DIR"
ENV_WORKERS = "SPINGUIDE_WORKERS"

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2


class CliError(Exception):
    """Fatal configuration or execution error (exit code 1)."""


@dataclass
class RunConfig:
    """Effective run configuration after merging file, env and flags."""

    preset: str | None = None
    scenario: dict | None = None
    output_dir: str = "."
    formats: list = field(default_factory=lambda: ["csv"])
    workers: int = 0  # 0: all available cores
    rel_tol: float | None = None
    abs_tol: float | None = None
    t_end_factor: float | None = None

    def integrator(self) -> IntegratorConfig | None:
        if self.rel_tol is None and self.abs_tol is None:
            return None
        return IntegratorConfig(
            rel_tol=self.rel_tol if self.rel_tol is not None else 1e-8,
            abs_tol=self.abs_tol if self.abs_tol is not None else 1e-10,
            t_end=1.0,  # horizon is set per point
        )


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise CliError(f"cannot read config file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise CliError(
            f"config parse error in {path} at line {err.lineno}, column {err.colno}: {err.msg}"
        ) from err


def _merge_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        data = _load_config_file(args.config)
        known = {
            "preset", "scenario", "output_dir", "formats", "workers",
            "rel_tol", "abs_tol", "t_end_factor",
        }
        unknown = set(data) - known
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            setattr(cfg, key, value)
    if os.environ.get(ENV_OUTPUT):
        cfg.output_dir = os.environ[ENV_OUTPUT]
    if os.environ.get(ENV_WORKERS):
        try:
            cfg.workers = int(os.environ[ENV_WORKERS])
        except ValueError as err:
            raise CliError(f"{ENV_WORKERS} must be an integer") from err
    if args.preset:
        cfg.preset = args.preset
    if args.output:
        cfg.output_dir = args.output
    if args.format:
        cfg.formats = list(args.format)
    if args.workers is not None:
        cfg.workers = args.workers
    if args.rel_tol is not None:
        cfg.rel_tol = args.rel_tol
    if args.abs_tol is not None:
        cfg.abs_tol = args.abs_tol
    if args.t_end_factor is not None:
        cfg.t_end_factor = args.t_end_factor
    for fmt in cfg.formats:
        if fmt not in ("csv", "json", "svg"):
            raise CliError(f"unknown output format {fmt!r}")
    return cfg


def _scenario_from_inline(spec: dict) -> Scenario:
    """Build a scan from an inline config block (small documented schema)."""
    try:
        ns = [int(n) for n in spec["N"]]
        fractions = [float(f) for f in spec["Np_frac"]]
        thetas = [float(t) for t in spec.get("theta", [math.pi])]
        spacing = spec.get("spacing", "full")
        solver = spec.get("solver", "cumulant")
        want_tsa = bool(spec.get("tsa", False))
    except KeyError as err:
        raise CliError(f"inline scenario is missing key {err}") from err
    points = []
    for n in ns:
        for f in fractions:
            for theta in thetas:
                points.append(ScanPoint(
                    n_total=n, n_pumped=max(1, round(f * n)), theta=theta,
                    solver=solver, spacing=spacing, want_tsa=want_tsa,
                ))
    return Scenario(name=spec.get("name", "inline"), points=tuple(points),
                    description="inline scenario")


def _apply_t_end_factor(built, factor):
    if factor is None:
        return built
    from dataclasses import replace
    if isinstance(built, Scenario):
        return replace(built, points=tuple(replace(p, t_end_factor=factor) for p in built.points))
    if isinstance(built, TrajectorySet):
        return replace(built, cases=tuple(
            replace(c, point=replace(c.point, t_end_factor=factor)) for c in built.cases
        ))
    return built


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _scan_svg(path, scenario, records):
    """Render scan records: heatmaps for 2D grids, line plots otherwise.

    Returns the list of files written.
    """
    recs = [r for r in records if r.solver != "dicke-analytic"]
    if not recs:
        recs = list(records)
    ns = sorted({r.n_total for r in recs})
    pops = sorted({round(math.sin(0.5 * r.theta) ** 2, 9) for r in recs})
    fracs = sorted({round(r.np_frac, 9) for r in recs})
    if len(ns) == 1 and len(pops) > 1 and len(fracs) > 1:
        # population map over (Np/N, initial population)
        lookup = {
            (round(r.np_frac, 9), round(math.sin(0.5 * r.theta) ** 2, 9)): r for r in recs
        }
        written = []
        for metric, label in (("ss_ee_p", "steady pumped population"),
                              ("ss_ee_np", "steady non-pumped population"),
                              ("lost_frac", "lost excitation fraction")):
            grid = [[getattr(lookup[(f, p)], metric) if (f, p) in lookup else float("nan")
                     for f in fracs] for p in pops]
            overlay_x = [f for f in np.linspace(min(fracs), max(fracs), 200) if f >= 0.5]
            overlay = ([f for f in overlay_x], [0.5 / f for f in overlay_x])
            out = path.replace(".svg", f"_{metric}.svg")
            svgplot.heatmap(out, fracs, pops, grid, xlabel="Np/N",
                            ylabel="initial excited population", title=label,
                            overlay=overlay, vmin=0.0, vmax=1.0 if metric != "lost_frac" else None)
            written.append(out)
        return written
    # line plot vs N, one series per (Np/N, solver)
    series = []
    for solver in sorted({r.solver for r in records}):
        for f in sorted({round(r.np_frac, 9) for r in records if r.solver == solver}):
            sel = sorted(
                (r.n_total, r.tsa if r.tsa is not None else r.lost_abs)
                for r in records
                if r.solver == solver and round(r.np_frac, 9) == f
            )
            ys = [v for _, v in sel if v is not None and not math.isnan(v)]
            if not ys:
                continue
            style = "dash" if solver == "dicke-analytic" else ""
            series.append((f"{solver} Np/N={f:g}", [n for n, _ in sel], ys, style))
    any_tsa = any(r.tsa is not None for r in records)
    svgplot.line_plot(path, series, xlabel="N",
                      ylabel="T_sa" if any_tsa else "lost excitations",
                      title=scenario.name, logx=True, logy=True)
    return [path]


def _trajectory_svg(path, name, results):
    series = []
    for label, columns in results:
        series.append((f"{label} ee_p", list(columns["t"]), list(columns["ee_p"])))
        series.append((f"{label} ee_np", list(columns["t"]), list(columns["ee_np"]), "dash"))
    svgplot.line_plot(path, series, xlabel="t (1/gamma1d)", ylabel="population", title=name)


def _dicke_svg(path, case, dist):
    rows = dist.rows()
    js = sorted({J for J, _, _ in rows})
    ms = sorted({M for _, M, _ in rows})
    lookup = {(J, M): p for J, M, p in rows}
    grid = [[lookup.get((J, M), float("nan")) for J in js] for M in ms]
    svgplot.heatmap(path, js, ms, grid, xlabel="J", ylabel="M",
                    title=f"{case.name}: Dicke populations")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    started = time.time()
    cfg = _merge_config(args)
    if not cfg.preset and not cfg.scenario:
        raise CliError("nothing to run: give --preset NAME or a config with a scenario")

    if cfg.preset:
        preset = get_preset(cfg.preset)  # KeyError -> fatal below
        built = preset.build()
        kind = preset.kind
        name = preset.name
    else:
        built = _scenario_from_inline(cfg.scenario)
        kind, name = "scan", built.name
    built = _apply_t_end_factor(built, cfg.t_end_factor)

    os.makedirs(cfg.output_dir, exist_ok=True)
    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)
    integrator = cfg.integrator()
    outputs, failures = [], []
    summary = {}

    if kind == "scan":
        result = run_scan(built, workers=workers, integrator=integrator)
        failures = [
            {"index": i, "point": repr(p), "error": msg} for i, p, msg in result.failures
        ]
        if any(p.want_tsa for p in built.points) and len(
            {r.n_total for r in result.records if r.tsa is not None}
        ) > 1:
            try:
                fit = tsa_scaling(result.records)
                summary["tsa_exponent"] = fit["exponent"]
            except ValueError:
                pass
        if "csv" in cfg.formats:
            outputs.append(_write(os.path.join(cfg.output_dir, f"{name}.csv"),
                                  records_to_csv(result.records)))
        if "json" in cfg.formats:
            outputs.append(_write(os.path.join(cfg.output_dir, f"{name}.json"),
                                  records_to_json(result.records)))
        if "svg" in cfg.formats:
            csv_path = os.path.join(cfg.output_dir, f"{name}.csv")
            if not os.path.exists(csv_path):
                outputs.append(_write(csv_path, records_to_csv(result.records)))
            svg_path = os.path.join(cfg.output_dir, f"{name}.svg")
            outputs.extend(_scan_svg(svg_path, built, result.records))
    elif kind == "trajectory":
        results = []
        for case in built.cases:
            _, columns, _ = run_trajectory_case(case, built.model, integrator)
            results.append((case.label, columns))
            if "csv" in cfg.formats or "svg" in cfg.formats:
                outputs.append(_write(
                    os.path.join(cfg.output_dir, f"{name}_{case.label}.csv"),
                    timeseries_to_csv(columns),
                ))
            if "json" in cfg.formats:
                payload = {k: [float(v) for v in vals] for k, vals in columns.items()}
                outputs.append(_write(
                    os.path.join(cfg.output_dir, f"{name}_{case.label}.json"),
                    json.dumps({"case": case.label, "columns": payload}, indent=2) + "\n",
                ))
        if "svg" in cfg.formats:
            svg_path = os.path.join(cfg.output_dir, f"{name}.svg")
            _trajectory_svg(svg_path, name, results)
            outputs.append(svg_path)
    elif kind == "dicke":
        from .coupling import two_ensemble_layout
        layout = two_ensemble_layout(built.n_pumped, built.n_nonpumped,
                                     spacing=WaveguideModel().lambda_eff, theta=built.theta)
        dist = dicke.decompose_initial_state(layout)
        summary["predicted_lost_excitation"] = dicke.predicted_lost_excitation(dist)
        if "csv" in cfg.formats or "svg" in cfg.formats:
            outputs.append(_write(os.path.join(cfg.output_dir, f"{name}_dicke.csv"),
                                  dicke_rows_to_csv(dist)))
        if "json" in cfg.formats:
            outputs.append(_write(
                os.path.join(cfg.output_dir, f"{name}_dicke.json"),
                json.dumps({"rows": dist.rows(), "summary": summary}, indent=2) + "\n",
            ))
        if "svg" in cfg.formats:
            svg_path = os.path.join(cfg.output_dir, f"{name}_dicke.svg")
            _dicke_svg(svg_path, built, dist)
            outputs.append(svg_path)
    else:
        raise CliError(f"preset kind {kind!r} not runnable")

    manifest = {
        "name": name,
        "version": __version__,
        "config": {
            "preset": cfg.preset, "scenario": cfg.scenario, "output_dir": cfg.output_dir,
            "formats": cfg.formats, "workers": workers, "rel_tol": cfg.rel_tol,
            "abs_tol": cfg.abs_tol, "t_end_factor": cfg.t_end_factor,
        },
        "summary": summary,
        "outputs": sorted(set(os.path.basename(p) for p in outputs)),
        "failures": failures,
        "wall_time_s": round(time.time() - started, 3),
    }
    _write(os.path.join(cfg.output_dir, f"{name}_manifest.json"),
           json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for line in manifest["outputs"]:
        print(os.path.join(cfg.output_dir, line))
    if failures:
        print(f"{len(failures)} grid point(s) failed; see manifest", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_presets(args) -> int:
    if args.describe:
        preset = get_preset(args.describe)
        print(preset.describe())
        return EXIT_OK
    rows = preset_catalog()
    width = max(len(name) for name, _, _ in rows)
    for name, description, figure in rows:
        print(f"{name:<{width}}  fig {figure:<12} {description}")
    return EXIT_OK


_GEOMETRIES = ("two-full", "two-half", "sampled-4", "sampled-6")


def _cmd_export_equations(args) -> int:
    from .coupling import EnsembleLayout, SubEnsemble

    model = WaveguideModel()
    lam = model.lambda_eff
    if args.geometry not in _GEOMETRIES:
        raise CliError(f"unknown geometry {args.geometry!r}; choose from {_GEOMETRIES}")
    if args.geometry.startswith("two"):
        spacing = lam if args.geometry == "two-full" else 0.5 * lam
        subs = [
            SubEnsemble(2, 0.0, pulse_area=math.pi, pumped=True),
            SubEnsemble(2, spacing),
        ]
    else:
        m_pos = int(args.geometry.split("-")[1])
        subs = []
        for i in range(m_pos):
            x = i * lam / m_pos
            if args.split_phase:
                subs.append(SubEnsemble(2, x, pulse_area=math.pi / 2, pumped=True))
                subs.append(SubEnsemble(2, x, pulse_area=math.pi / 2,
                                        pulse_phase=math.pi, pumped=True))
            else:
                subs.append(SubEnsemble(2, x, pulse_area=math.pi, pumped=True))
        for i in range(m_pos):
            subs.append(SubEnsemble(2, i * lam / m_pos))
    layout = EnsembleLayout(tuple(subs))
    system = cumulant.derive_system(model, layout, zero_omega=args.zero_omega)
    listing = system.render_equations()
    if args.output:
        _write(args.output, listing)
        print(args.output)
    else:
        print(listing, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinguide",
        description="Collective emitter dynamics in a single-mode waveguide",
    )
    parser.add_argument("--version", action="version", version=f"spinguide {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset or config-file scenario")
    run.add_argument("--preset", help="preset name (see `spinguide presets`)")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--format", nargs="+", choices=("csv", "json", "svg"),
                     help="output formats (default csv)")
    run.add_argument("--output", help="output directory")
    run.add_argument("--workers", type=int, help="parallel grid workers (0 = all cores)")
    run.add_argument("--rel-tol", type=float, dest="rel_tol")
    run.add_argument("--abs-tol", type=float, dest="abs_tol")
    run.add_argument("--t-end-factor", type=float, dest="t_end_factor",
                     help="horizon in units of 1/(N gamma1d), default 100")
    run.set_defaults(func=_cmd_run)

    pres = sub.add_parser("presets", help="list presets or describe one")
    pres.add_argument("--describe", metavar="NAME")
    pres.set_defaults(func=_cmd_presets)

    exp = sub.add_parser("export-equations", help="write the derived ODE listing")
    exp.add_argument("--geometry", default="two-full",
                     help="two-full | two-half | sampled-4 | sampled-6")
    exp.add_argument("--split-phase", action="store_true")
    exp.add_argument("--zero-omega", action="store_true")
    exp.add_argument("--output", help="file path (default: stdout)")
    exp.set_defaults(func=_cmd_export_equations)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FATAL
    except KeyError as err:
        print(f"error: {err.args[0]}", file=sys.stderr)
        return EXIT_FATAL
    except DimensionCapError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FATAL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
