"""Scenario definitions and metrics for the figure-style numerical studies.

A scenario is a grid of scan points (or a set of named trajectory runs) with
a solver choice per point.  Metrics per point: lost excitation (absolute and
fractional), steady-state populations of the pumped / non-pumped groups, and
the energy-transfer time T_sa (time for the non-pumped group to reach 95% of
its final excitation).  Scan points are independent and can be fanned out to
a process pool; results are always reported in canonical grid order.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import cumulant, dicke, exact
from .coupling import EnsembleLayout, SubEnsemble, WaveguideModel, two_ensemble_layout
from .ode import EventSpec, IntegratorConfig, detect_event, detect_steady_state, integrate

__all__ = [
    "ScanPoint",
    "MetricRecord",
    "Scenario",
    "TrajectoryCase",
    "TrajectorySet",
    "DickeCase",
    "Preset",
    "PRESETS",
    "preset_catalog",
    "get_preset",
    "build_layout",
    "run_point",
    "run_scan",
    "run_trajectory_case",
    "lost_excitation_metrics",
    "tsa_scaling",
    "position_sampled_run",
    "records_to_csv",
    "records_to_json",
    "timeseries_to_csv",
    "dicke_rows_to_csv",
]

CSV_HEADER = "N,Np_frac,theta,lost_abs,lost_frac,ss_ee_p,ss_ee_np,Tsa,solver"

SOLVERS = ("exact", "cumulant", "dicke-analytic")


@dataclass(frozen=True)
class ScanPoint:
    """One grid point: atom numbers, pulse, geometry and solver."""

    n_total: int
    n_pumped: int
    theta: float
    solver: str = "cumulant"
    spacing: str = "full"  # "full" (lambda_eff) or "half" (lambda_eff/2)
    n_positions: int = 0  # 0: two-site layout; 4/6: equidistant position sampling
    split_phase: bool = False
    zero_omega: bool = False
    want_tsa: bool = False
    t_end_factor: float = 100.0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.spacing not in ("full", "half"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if not 0 < self.n_pumped <= self.n_total:
            raise ValueError("need 0 < n_pumped <= n_total")
        if self.n_positions not in (0, 2, 3, 4, 5, 6):
            raise ValueError("n_positions must be 0 (two-site) or a small sampling count")

    @property
    def np_frac(self) -> float:
        return self.n_pumped / self.n_total

    @property
    def initial_excitation_fraction(self) -> float:
        return math.sin(0.5 * self.theta) ** 2 * self.np_frac


@dataclass
class MetricRecord:
    """Metrics of one scan point plus run metadata."""

    n_total: int
    np_frac: float
    theta: float
    lost_abs: float
    lost_frac: float
    ss_ee_p: float
    ss_ee_np: float
    tsa: float | None
    solver: str
    steady_time: float | None = None
    steady_reached: bool = True
    metadata: dict = field(default_factory=dict)

    def csv_row(self) -> str:
        cells = [
            str(self.n_total),
            _fmt(self.np_frac),
            _fmt(self.theta),
            _fmt(self.lost_abs),
            _fmt(self.lost_frac),
            _fmt(self.ss_ee_p),
            _fmt(self.ss_ee_np),
            _fmt(self.tsa),
            self.solver,
        ]
        return ",".join(cells)

    def as_json_dict(self) -> dict:
        return {
            "N": self.n_total,
            "Np_frac": self.np_frac,
            "theta": self.theta,
            "lost_abs": self.lost_abs,
            "lost_frac": self.lost_frac,
            "ss_ee_p": self.ss_ee_p,
            "ss_ee_np": self.ss_ee_np,
            "Tsa": self.tsa,
            "solver": self.solver,
            "metadata": {
                "steady_time": self.steady_time,
                "steady_reached": self.steady_reached,
                **self.metadata,
            },
        }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return repr(float(value))


@dataclass(frozen=True)
class Scenario:
    """A named scan: model, grid and requested metrics."""

    name: str
    points: tuple
    description: str = ""
    figure: str = ""
    model: WaveguideModel = WaveguideModel()

    def __post_init__(self):
        if not self.points:
            raise ValueError("scan grid must be non-empty")


@dataclass(frozen=True)
class TrajectoryCase:
    """One named time-evolution run emitting a columnar time series."""

    label: str
    point: ScanPoint
    n_samples: int = 400


@dataclass(frozen=True)
class TrajectorySet:
    name: str
    cases: tuple
    description: str = ""
    figure: str = ""
    model: WaveguideModel = WaveguideModel()


@dataclass(frozen=True)
class DickeCase:
    """Dicke-triangle decomposition of a two-ensemble initial state."""

    name: str
    n_pumped: int
    n_nonpumped: int
    theta: float
    description: str = ""
    figure: str = ""


def build_layout(point: ScanPoint, model: WaveguideModel) -> EnsembleLayout:
    """Materialize the layout of a scan point.

    ``spacing="full"``: consecutive atoms sit at multiples of the guided
    wavelength, so each group is one collective spin (pumped at x = 0,
    non-pumped at lambda_eff).  ``spacing="half"``: consecutive atoms sit at
    multiples of lambda_eff/2, which leaves every group split over the two
    mode-phase classes {0, lambda_eff/2} with anti-symmetric decay between
    the classes; that alternation is what makes the emitted radiation of a
    coherently pumped group interfere destructively.  Position-sampled
    layouts spread both groups over n_positions equidistant sites spanning
    one wavelength; the split-phase variant additionally halves each pumped
    sub-ensemble into opposite pulse phases 0 and pi to cancel the net
    coherence.
    """
    lam = model.lambda_eff
    if point.n_positions == 0:
        if point.spacing == "full":
            return two_ensemble_layout(
                point.n_pumped, point.n_total - point.n_pumped,
                spacing=lam, theta=point.theta,
            )
        subs = []
        for count, pumped in ((point.n_pumped, True),
                              (point.n_total - point.n_pumped, False)):
            half = count // 2
            for site_count, x in ((count - half, 0.0), (half, 0.5 * lam)):
                if site_count == 0:
                    continue
                if pumped:
                    subs.append(SubEnsemble(site_count, x, pulse_area=point.theta, pumped=True))
                else:
                    subs.append(SubEnsemble(site_count, x))
        return EnsembleLayout(tuple(subs))
    m_pos = point.n_positions
    sites = [i * lam / m_pos for i in range(m_pos)]
    subs = []
    for group_count, pumped in ((point.n_pumped, True), (point.n_total - point.n_pumped, False)):
        base, extra = divmod(group_count, m_pos)
        for i, x in enumerate(sites):
            count = base + (1 if i < extra else 0)
            if count == 0:
                continue
            if pumped and point.split_phase:
                half = count // 2
                if half:
                    subs.append(SubEnsemble(half, x, pulse_area=point.theta, pulse_phase=0.0, pumped=True))
                if count - half:
                    subs.append(SubEnsemble(count - half, x, pulse_area=point.theta,
                                            pulse_phase=math.pi, pumped=True))
            elif pumped:
                subs.append(SubEnsemble(count, x, pulse_area=point.theta, pumped=True))
            else:
                subs.append(SubEnsemble(count, x))
    return EnsembleLayout(tuple(subs))


def _integrator_for(point: ScanPoint, overrides: IntegratorConfig | None, model: WaveguideModel):
    collective_rate = point.n_total * model.gamma1d
    t_end = point.t_end_factor / collective_rate
    window = 5.0 / collective_rate
    slope = 1e-6 * collective_rate
    if overrides is None:
        return IntegratorConfig(t_end=t_end, steady_window=window, steady_slope=slope)
    return replace(overrides, t_end=t_end,
                   steady_window=overrides.steady_window or window,
                   steady_slope=overrides.steady_slope or slope)


def _gauge_reduced_half_layout(point: ScanPoint) -> EnsembleLayout:
    """Unitary-equivalent form of the half-wavelength layout.

    Flipping the sign of the lowering operators on the lambda_eff/2 phase
    class turns the anti-symmetric decay matrix into the symmetric one while
    shifting those atoms' pulse phases by pi.  Populations are invariant, the
    ground-state halves merge into one collective spin, and the exact solver
    dimension drops accordingly.
    """
    n_p, n_np = point.n_pumped, point.n_total - point.n_pumped
    half = n_p // 2
    subs = []
    if n_p - half:
        subs.append(SubEnsemble(n_p - half, 0.0, pulse_area=point.theta, pumped=True))
    if half:
        subs.append(SubEnsemble(half, 0.0, pulse_area=point.theta,
                                pulse_phase=math.pi, pumped=True))
    if n_np:
        subs.append(SubEnsemble(n_np, 0.0))
    return EnsembleLayout(tuple(subs))


def _run_trajectory(point: ScanPoint, model: WaveguideModel, config: IntegratorConfig):
    layout = build_layout(point, model)
    if point.solver == "exact":
        if point.n_positions or point.split_phase or point.zero_omega:
            raise ValueError("the exact solver only runs two-site layouts")
        if point.spacing == "half":
            layout = _gauge_reduced_half_layout(point)
        generator = exact.build_liouvillian(model, layout)
        state = exact.initial_product_state(layout)
        traj, _, _ = exact.evolve(state, generator, config, n_state_samples=0)
        return traj, layout
    system = cumulant.derive_system(model, layout, zero_omega=point.zero_omega)
    traj = integrate(system.rhs, system.initial_moments(), config, obs=system.observables())
    return traj, layout


def lost_excitation_metrics(traj, *, steady_time=None):
    """(fraction, absolute) lost excitation, evaluated at the steady time.

    Falls back to the end of the horizon when no steady state was detected;
    the caller flags such records.
    """
    t_eval = traj.final_t if steady_time is None else steady_time
    e0 = float(traj.obs[0, traj.index_of("e_total")])
    e_end = float(traj.obs_at(t_eval, "e_total")[0])
    absolute = e0 - e_end
    fraction = absolute / e0 if e0 > 0 else 0.0
    return fraction, absolute


def run_point(point: ScanPoint, model: WaveguideModel = WaveguideModel(),
              integrator: IntegratorConfig | None = None) -> MetricRecord:
    """Run one scan point and collect its metrics."""
    if point.solver == "dicke-analytic":
        layout = build_layout(point, model)
        dist = dicke.decompose_initial_state(layout)
        lost = dicke.predicted_lost_excitation(dist)
        e0 = point.n_pumped * math.sin(0.5 * point.theta) ** 2
        return MetricRecord(
            n_total=point.n_total, np_frac=point.np_frac, theta=point.theta,
            lost_abs=lost, lost_frac=lost / e0 if e0 else 0.0,
            ss_ee_p=float("nan"), ss_ee_np=float("nan"), tsa=None,
            solver=point.solver, steady_time=None, steady_reached=True,
            metadata={"analytic": True},
        )

    config = _integrator_for(point, integrator, model)
    traj, layout = _run_trajectory(point, model, config)
    pop_names = [n for n in traj.names if n.startswith("ee")]
    steady = detect_steady_state(
        traj, window=config.steady_window, slope=config.steady_slope, names=pop_names
    )
    reached = steady is not None
    lost_frac, lost_abs = lost_excitation_metrics(traj, steady_time=steady)
    t_metric = steady if reached else traj.final_t
    ss_p = float(traj.obs_at(t_metric, "ee_p")[0]) if "ee_p" in traj.names else float("nan")
    ss_np = float(traj.obs_at(t_metric, "ee_np")[0]) if "ee_np" in traj.names else float("nan")

    tsa = None
    if point.want_tsa:
        final_np = float(traj.obs[-1, traj.index_of("ee_np")])
        tsa = detect_event(traj, EventSpec("ee_np", 0.95 * final_np, "rising"))

    return MetricRecord(
        n_total=point.n_total, np_frac=point.np_frac, theta=point.theta,
        lost_abs=lost_abs, lost_frac=lost_frac, ss_ee_p=ss_p, ss_ee_np=ss_np,
        tsa=tsa, solver=point.solver, steady_time=steady, steady_reached=reached,
        metadata={
            "E": point.initial_excitation_fraction,
            "spacing": point.spacing,
            "n_positions": point.n_positions,
            "rel_tol": config.rel_tol,
            "abs_tol": config.abs_tol,
        },
    )


def _pool_runner(args):
    index, point, model, integrator = args
    try:
        return index, run_point(point, model, integrator), None
    except Exception as err:  # per-point failures must not kill the scan
        return index, None, f"{type(err).__name__}: {err}"


@dataclass
class ScanResult:
    scenario: Scenario
    records: list
    failures: list  # (index, point, message)

    @property
    def ok(self) -> bool:
        return not self.failures


def run_scan(scenario: Scenario, *, workers: int = 1,
             integrator: IntegratorConfig | None = None) -> ScanResult:
    """Run every grid point; failures are recorded and the scan continues.

    Results keep the canonical grid order regardless of worker scheduling,
    so serialized output is deterministic.
    """
    tasks = [(i, p, scenario.model, integrator) for i, p in enumerate(scenario.points)]
    outcomes = []
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_pool_runner, tasks))
    else:
        outcomes = [_pool_runner(t) for t in tasks]
    outcomes.sort(key=lambda item: item[0])
    records = [rec for _, rec, err in outcomes if err is None]
    failures = [
        (index, scenario.points[index], err) for index, _, err in outcomes if err is not None
    ]
    return ScanResult(scenario=scenario, records=records, failures=failures)


def run_trajectory_case(case: TrajectoryCase, model: WaveguideModel = WaveguideModel(),
                        integrator: IntegratorConfig | None = None):
    """Run one named time evolution; returns (times, column dict, trajectory)."""
    config = _integrator_for(case.point, integrator, model)
    traj, layout = _run_trajectory(case.point, model, config)
    times = np.linspace(0.0, traj.final_t, case.n_samples)
    columns = {"t": times}
    for name in traj.names:
        columns[name] = traj.obs_at(times, name)
    return times, columns, traj


def tsa_scaling(records) -> dict:
    """Least-squares log-log fit of T_sa against N over a scan's records."""
    pts = [(r.n_total, r.tsa) for r in records if r.tsa is not None]
    if len(pts) < 2:
        raise ValueError("need at least two records with a transfer time")
    logn = np.log([p[0] for p in pts])
    logt = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(logn, logt, 1)
    return {"exponent": float(slope), "intercept": float(intercept), "points": pts}


def position_sampled_run(n_total: int, theta: float, n_pumped: int, *,
                         n_positions: int = 4, split_phase: bool = False,
                         zero_omega: bool = False, t_end_factor: float = 100.0,
                         model: WaveguideModel = WaveguideModel(),
                         integrator: IntegratorConfig | None = None):
    """Cumulant run with both groups spread over equidistant mode phases."""
    point = ScanPoint(
        n_total=n_total, n_pumped=n_pumped, theta=theta, solver="cumulant",
        n_positions=n_positions, split_phase=split_phase, zero_omega=zero_omega,
        t_end_factor=t_end_factor,
    )
    case = TrajectoryCase(label=f"{n_positions}pos", point=point)
    return run_trajectory_case(case, model, integrator)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def records_to_csv(records) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in records)
    return "\n".join(lines) + "\n"


def records_to_json(records) -> str:
    """Top-level array of record objects mirroring the CSV columns plus metadata."""
    return json.dumps([r.as_json_dict() for r in records], indent=2, sort_keys=True) + "\n"


def timeseries_to_csv(columns) -> str:
    names = list(columns)
    rows = [",".join(names)]
    length = len(columns[names[0]])
    for k in range(length):
        rows.append(",".join(_fmt(float(columns[n][k])) for n in names))
    return "\n".join(rows) + "\n"


def dicke_rows_to_csv(distribution) -> str:
    lines = ["J,M,P"]
    lines.extend(f"{_fmt(J)},{_fmt(M)},{_fmt(p)}" for J, M, p in distribution.rows())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# preset catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    figure: str
    kind: str  # "scan" | "trajectory" | "dicke"
    build: object  # zero-argument factory

    def describe(self) -> str:
        built = self.build()
        lines = [f"{self.name}: {self.description}", f"  figure: {self.figure}"]
        if isinstance(built, Scenario):
            ns = sorted({p.n_total for p in built.points})
            fr = sorted({round(p.np_frac, 6) for p in built.points})
            th = sorted({round(p.theta, 6) for p in built.points})
            solvers = sorted({p.solver for p in built.points})
            lines.append(f"  grid: N in {ns}, Np/N in {fr}, theta in {th}")
            lines.append(f"  solvers: {solvers}; {len(built.points)} points")
            if any(p.want_tsa for p in built.points):
                lines.append("  fits: log-log T_sa exponent, expected close to -1")
        elif isinstance(built, TrajectorySet):
            lines.append(f"  runs: {[c.label for c in built.cases]}")
        elif isinstance(built, DickeCase):
            lines.append(
                f"  decomposition: N_p={built.n_pumped}, N_np={built.n_nonpumped}, theta={built.theta:.4f}"
            )
        return "\n".join(lines)


def _theta_for_population(population: float) -> float:
    """Pulse area giving the requested initial excited-state population."""
    return 2.0 * math.asin(math.sqrt(population))


def _two_site_grid(n_values, fractions, theta, *, spacing, solver="cumulant", want_tsa=False,
                   t_end_factor=100.0):
    points = []
    for n in n_values:
        for f in fractions:
            n_p = max(1, round(f * n))
            points.append(ScanPoint(
                n_total=n, n_pumped=n_p, theta=theta, solver=solver, spacing=spacing,
                want_tsa=want_tsa, t_end_factor=t_end_factor,
            ))
    return tuple(points)


def _fig2a(small):
    ns = (20, 40, 100, 400) if small else (20, 40, 100, 400, 1000, 10000, 100000)
    fr = (0.1, 0.25, 0.4) if small else (0.05, 0.1, 0.2, 0.3, 0.4, 0.45)
    return Scenario(
        name="fig2a" + ("-small" if small else ""),
        points=_two_site_grid(ns, fr, math.pi, spacing="full"),
        description="Lost excitation fraction vs N for full inversion of N_p atoms",
        figure="2a",
    )


def _fig2b(small):
    ns = (40, 100, 400, 1000) if small else (40, 100, 400, 1000, 10000, 100000)
    fr = (0.1, 0.25, 0.4)
    cum = _two_site_grid(ns, fr, math.pi, spacing="full")
    ana = tuple(replace(p, solver="dicke-analytic") for p in cum)
    return Scenario(
        name="fig2b" + ("-small" if small else ""),
        points=cum + ana,
        description="Absolute lost excitations vs N, saturating at N_p/(N_np - N_p)",
        figure="2b",
    )


def _fig2d(small):
    fr = (0.2, 0.3, 0.4) if small else tuple(np.round(np.linspace(0.05, 0.5, 10), 4))
    pops = (0.5, 0.75, 0.9, 1.0) if small else tuple(np.round(np.linspace(0.1, 1.0, 10), 4))
    n = 10000
    points = []
    for f in fr:
        for pop in pops:
            points.append(ScanPoint(
                n_total=n, n_pumped=round(f * n), theta=_theta_for_population(pop),
                solver="cumulant", spacing="full",
            ))
    return Scenario(
        name="fig2d" + ("-small" if small else ""),
        points=tuple(points),
        description="Lost fraction vs coherent pulse strength at lambda_eff spacing",
        figure="2d",
    )


def _fig2e(small):
    ns = (40, 100, 400, 1000) if small else (40, 100, 400, 1000, 10000, 100000)
    fr = (0.1, 0.25, 0.4)
    return Scenario(
        name="fig2e" + ("-small" if small else ""),
        points=_two_site_grid(ns, fr, 2 * math.pi / 3, spacing="full"),
        description="Lost excitation vs N for a 2/3 pi pulse (no saturation)",
        figure="2e",
    )


def _fig3(small, spacing):
    n = 10000 if small else 1000000
    fr = (0.1, 0.3, 0.5, 0.7, 0.9) if small else tuple(np.round(np.linspace(0.05, 0.95, 19), 4))
    pops = (0.1, 0.3, 0.5, 0.75, 1.0) if small else tuple(np.round(np.linspace(0.05, 1.0, 20), 4))
    points = []
    for f in fr:
        for pop in pops:
            points.append(ScanPoint(
                n_total=n, n_pumped=round(f * n), theta=_theta_for_population(pop),
                solver="cumulant", spacing=spacing,
            ))
    tag = "" if spacing == "half" else "-sym"
    return Scenario(
        name=f"fig3{tag}" + ("-small" if small else ""),
        points=tuple(points),
        description=(
            "Steady-state populations and lost fraction over (Np/N, initial population); "
            + ("anti-symmetric decay (lambda_eff/2), threshold at E = 1/2"
               if spacing == "half" else "symmetric decay (lambda_eff)")
        ),
        figure="3",
    )


def _fig4a(small):
    ns = (100, 1000, 10000) if small else (100, 1000, 10000, 100000)
    points = tuple(
        ScanPoint(n_total=n, n_pumped=round(0.8 * n), theta=math.pi, solver="cumulant",
                  spacing="half", want_tsa=True)
        for n in ns
    )
    scenario = Scenario(
        name="fig4a" + ("-small" if small else ""),
        points=points,
        description="Transfer time T_sa vs N above threshold; exponent close to -1",
        figure="4a",
    )
    _require_above_threshold(scenario)
    return scenario


def _fig4b(small):
    n = 10000
    es = (0.55, 0.6, 0.7, 0.8, 0.9) if small else tuple(np.round(np.linspace(0.52, 0.9, 12), 4))
    points = []
    for e in es:
        points.append(ScanPoint(  # full excitation of fewer atoms
            n_total=n, n_pumped=round(e * n), theta=math.pi, solver="cumulant",
            spacing="half", want_tsa=True,
        ))
        points.append(ScanPoint(  # partial excitation of more atoms, same E
            n_total=n, n_pumped=round(0.9 * n), theta=_theta_for_population(e / 0.9),
            solver="cumulant", spacing="half", want_tsa=True,
        ))
    scenario = Scenario(
        name="fig4b" + ("-small" if small else ""),
        points=tuple(points),
        description="T_sa for different preparations sharing the initial excitation fraction E",
        figure="4b",
    )
    _require_above_threshold(scenario)
    return scenario


def _require_above_threshold(scenario: Scenario):
    bad = [p for p in scenario.points if p.initial_excitation_fraction <= 0.5]
    if bad:
        raise ValueError(
            f"{scenario.name}: transfer-time points must start above E = 1/2; offending "
            f"points at E = {[round(p.initial_excitation_fraction, 3) for p in bad]}"
        )


def _fig5(variant, small):
    n = 1000 if small else 10000
    theta = math.pi if variant == "a" else 2 * math.pi / 3
    split = variant == "c"
    cases = []
    for label, frac in (("below", 0.2), ("above", 0.8)):
        cases.append(TrajectoryCase(
            label=label,
            point=ScanPoint(
                n_total=n, n_pumped=round(frac * n), theta=theta, solver="cumulant",
                n_positions=4, split_phase=split, t_end_factor=300.0,
            ),
        ))
    return TrajectorySet(
        name=f"fig5{variant}" + ("-small" if small else ""),
        cases=tuple(cases),
        description={
            "a": "4-position sampling, full inversion: transfer survives coherent coupling",
            "b": "4-position sampling, 2/3 pi pulse: coherent coupling degrades the transfer",
            "c": "4-position sampling, 2/3 pi pulse split into opposite phases: recovery",
        }[variant],
        figure=f"5{variant}",
    )


def _fig6(small):
    n = 1000 if small else 10000
    cases = []
    for label, n_pos, theta, zero in (
        ("pi-4pos", 4, math.pi, False),
        ("pi-6pos", 6, math.pi, False),
        ("twothirds-4pos", 4, 2 * math.pi / 3, False),
        ("twothirds-6pos", 6, 2 * math.pi / 3, False),
        ("pi-4pos-noomega", 4, math.pi, True),
    ):
        cases.append(TrajectoryCase(
            label=label,
            point=ScanPoint(
                n_total=n, n_pumped=round(0.8 * n), theta=theta, solver="cumulant",
                n_positions=n_pos, zero_omega=zero, t_end_factor=300.0,
            ),
        ))
    return TrajectorySet(
        name="fig6" + ("-small" if small else ""),
        cases=tuple(cases),
        description="4 vs 6 sampled positions and the zero-exchange control run",
        figure="6 (appendix)",
    )


def _dicke_case(name, theta, figure):
    return DickeCase(
        name=name, n_pumped=8, n_nonpumped=12, theta=theta,
        description="Dicke-triangle populations for N = 20, N_p = 8",
        figure=figure,
    )


def _build_presets():
    presets = {}

    def add(name, description, figure, kind, build):
        presets[name] = Preset(name=name, description=description, figure=figure,
                               kind=kind, build=build)

    for small in (False, True):
        tag = "-small" if small else ""
        add("fig2a" + tag, "lost excitation fraction vs N (pi pulse)", "2a", "scan",
            lambda s=small: _fig2a(s))
        add("fig2b" + tag, "absolute lost excitations vs N with analytic reference", "2b", "scan",
            lambda s=small: _fig2b(s))
        add("fig2d" + tag, "lost fraction vs pulse strength, lambda spacing", "2d", "scan",
            lambda s=small: _fig2d(s))
        add("fig2e" + tag, "lost excitation vs N for 2/3 pi pulse", "2e", "scan",
            lambda s=small: _fig2e(s))
        add("fig3" + tag, "threshold map at lambda/2 spacing", "3d-f", "scan",
            lambda s=small: _fig3(s, "half"))
        add("fig3-sym" + tag, "population map at lambda spacing", "3a-c", "scan",
            lambda s=small: _fig3(s, "full"))
        add("fig4a" + tag, "transfer time scaling with N", "4a", "scan",
            lambda s=small: _fig4a(s))
        add("fig4b" + tag, "transfer time vs initial excitation fraction", "4b", "scan",
            lambda s=small: _fig4b(s))
        for v in ("a", "b", "c"):
            add(f"fig5{v}" + tag, _fig5(v, True).description, f"5{v}", "trajectory",
                lambda s=small, vv=v: _fig5(vv, s))
        add("fig6" + tag, "4 vs 6 position sampling comparison", "6", "trajectory",
            lambda s=small: _fig6(s))

    add("fig2c", "Dicke triangle, pi pulse", "2c", "dicke",
        lambda: _dicke_case("fig2c", math.pi, "2c"))
    add("fig2c-small", "Dicke triangle, pi pulse", "2c", "dicke",
        lambda: _dicke_case("fig2c", math.pi, "2c"))
    add("fig2f", "Dicke triangle, 2/3 pi pulse", "2f", "dicke",
        lambda: _dicke_case("fig2f", 2 * math.pi / 3, "2f"))
    add("fig2f-small", "Dicke triangle, 2/3 pi pulse", "2f", "dicke",
        lambda: _dicke_case("fig2f", 2 * math.pi / 3, "2f"))
    # aliases used in docs and scripts
    presets["fig2c-dicke"] = presets["fig2c"]
    presets["fig2f-dicke"] = presets["fig2f"]
    return presets


PRESETS = _build_presets()


def preset_catalog():
    """(name, description, figure) rows, aliases excluded."""
    rows = []
    seen = set()
    for name, preset in PRESETS.items():
        if preset.name in seen:
            continue
        seen.add(preset.name)
        rows.append((preset.name, preset.description, preset.figure))
    return rows


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; see the preset catalog") from None
