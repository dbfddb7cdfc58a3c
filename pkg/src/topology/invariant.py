"""
The Z2 Invariant - End-to-end pipeline, sweeps and homotopy checks.

Pipeline for a symmetric insulator:
1. check the declared symmetry and certify the gap
2. sample P_-(k) and integrate the parallel transport
3. build the symmetric transport frame from a symmetric basis of H(0)
4. read off the occupied Berry phase and reduce it mod 2

Three integers must agree in parity: the occupied Berry phase, -tr X / 2pi
and the winding of det W(k). Disagreement aborts; nothing is voted away.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from bands.model import TightBindingModel, fiber, validate_symmetry
from bands.spectral import (
    GapReport,
    ProjectionFamily,
    certify_gap,
    eigensystem,
    kato_nagy,
    projection_family,
    projection_symmetry_residual,
)
from core.config import Settings, defaults
from core.errors import (
    ConvergenceError,
    GapError,
    InternalConsistencyError,
    KatoNagyDistanceError,
    ModelInvalidError,
    NumericError,
    PathError,
    ResolutionError,
)
from topology.frame import (
    BlochFrame,
    apply_gauge,
    berry_phase,
    build_frame,
    frame_residuals,
    initial_symmetric_basis,
    random_symmetric_gauge,
)
from topology.transport import TransportResult, det_winding_loop, integrate_transport, transport_symmetry_check
from topology.winding import unitary_winding

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InvariantReport:
    """Outcome of compute_invariant with every diagnostic that went into it."""

    z2: int
    berry_integer: int
    berry_value: float
    pathway_agreement: Dict[str, int]
    gap: GapReport
    residuals: Dict[str, float]
    grid_size: int
    symmetry: str
    branch_flag: bool

    @property
    def residual_max(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


@dataclass(frozen=True)
class Pipeline:
    """Intermediate objects of one invariant computation, for reuse by checks."""

    report: InvariantReport
    transport: TransportResult
    frame: BlochFrame


def _round_checked(value: float, label: str, settings: Settings) -> int:
    integer = int(round(value))
    if abs(value - integer) > settings.rounding_tol:
        raise ResolutionError(f"{label} = {value:.6f} is not close to an integer")
    return integer


def _transport_with_refinement(
    model: TightBindingModel, grid_size: int, settings: Settings
) -> Tuple[TransportResult, BlochFrame]:
    sym = model.symmetry
    basis0 = initial_symmetric_basis(eigensystem(fiber(model, 0.0), settings), sym, settings)
    grid = grid_size
    for level in range(settings.refinement_levels + 1):
        try:
            pf = projection_family(model, grid, settings)
            tr = integrate_transport(pf, settings)
            frame = build_frame(tr, basis0, sym.kind, settings)
            berry_phase(frame, "occupied", settings)
            return tr, frame
        except (ConvergenceError, ResolutionError) as exc:
            if level == settings.refinement_levels:
                raise
            logger.info("grid %d not fine enough (%s); doubling", grid, exc)
            grid *= 2
    raise AssertionError("unreachable")


def invariant_pipeline(
    model: TightBindingModel, grid_size: Optional[int] = None, settings: Optional[Settings] = None
) -> Pipeline:
    """compute_invariant, keeping the transport and the frame."""
    settings = settings or defaults()
    grid_size = grid_size or settings.transport_grid
    sym = model.symmetry
    if sym is None:
        raise ModelInvalidError("the invariant needs a declared symmetry", code="symmetry_violation")
    symmetry_report = validate_symmetry(model, grid_size, settings)
    if not symmetry_report.passed:
        raise ModelInvalidError(
            f"{sym.kind.value} symmetry fails with residual {symmetry_report.residual:.3e}",
            code="symmetry_violation",
        )

    gap = certify_gap(model, grid_size, settings)
    tr, frame = _transport_with_refinement(model, grid_size, settings)

    occupied = berry_phase(frame, "occupied", settings)
    all_bands = berry_phase(frame, "all", settings)
    trace_integer = _round_checked(tr.berry_trace, "-tr X / 2pi", settings)
    det_w = unitary_winding(det_winding_loop(tr), settings)

    pathways = {
        "occupied_berry": occupied.integer,
        "all_bands_berry": all_bands.integer,
        "transport": trace_integer,
        "winding_oracle": det_w,
    }
    parities = {name: value % 2 for name, value in pathways.items()}
    if len(set(parities.values())) != 1:
        raise InternalConsistencyError(f"pathways disagree on the parity: {pathways}")
    if trace_integer != det_w:
        raise InternalConsistencyError(f"-tr X / 2pi = {trace_integer} but det W winds {det_w} times")

    residuals = dict(tr.residuals)
    for name, value in frame_residuals(frame, sym).items():
        residuals[f"frame_{name}"] = value
    residuals["symmetry"] = symmetry_report.residual
    residuals["projection_symmetry"] = projection_symmetry_residual(tr.family, sym)
    residuals["transport_symmetry"] = transport_symmetry_check(tr, sym)
    residuals["berry_rounding"] = occupied.residual
    residuals["berry_corollary"] = abs(occupied.value - all_bands.value)

    report = InvariantReport(
        z2=occupied.integer % 2,
        berry_integer=occupied.integer,
        berry_value=occupied.value,
        pathway_agreement=pathways,
        gap=gap,
        residuals=residuals,
        grid_size=tr.grid_size,
        symmetry=sym.kind.value,
        branch_flag=tr.branch_flag,
    )
    logger.info("z2=%d (berry integer %d) on %d points", report.z2, report.berry_integer, report.grid_size)
    return Pipeline(report=report, transport=tr, frame=frame)


def compute_invariant(
    model: TightBindingModel, grid_size: Optional[int] = None, settings: Optional[Settings] = None
) -> InvariantReport:
    """
    Z2 invariant of a symmetric insulator.

    Raises:
        ModelInvalidError: no symmetry, or the symmetry does not hold
        GapError, ConvergenceError, ResolutionError: numerics could not certify
        InternalConsistencyError: independent pathways disagree
    """
    return invariant_pipeline(model, grid_size, settings).report


# -- gauge robustness ---------------------------------------------------------


@dataclass
class GaugeRobustnessReport:
    z2: int
    windings: List[int] = field(default_factory=list)
    shifts: List[int] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def gauge_robustness(
    model: TightBindingModel,
    grid_size: Optional[int] = None,
    seeds: Sequence[int] = range(20),
    settings: Optional[Settings] = None,
) -> GaugeRobustnessReport:
    """
    Apply seeded random symmetric gauges to the symmetric frame and check that
    each winding is even, the Berry phase moves by exactly that winding and the
    parity stays put.
    """
    settings = settings or defaults()
    pipeline = invariant_pipeline(model, grid_size, settings)
    frame = pipeline.frame
    base = berry_phase(frame, "occupied", settings)
    result = GaugeRobustnessReport(z2=pipeline.report.z2)
    for seed in seeds:
        gauge = random_symmetric_gauge(frame, model.symmetry, seed)
        moved = berry_phase(apply_gauge(frame, gauge, settings), "occupied", settings)
        shift = moved.integer - base.integer
        result.windings.append(gauge.winding)
        result.shifts.append(shift)
        if gauge.winding % 2:
            result.failures.append(f"seed {seed}: odd gauge winding {gauge.winding}")
        if shift != gauge.winding:
            result.failures.append(f"seed {seed}: shift {shift} but gauge winding {gauge.winding}")
        if moved.integer % 2 != result.z2:
            result.failures.append(f"seed {seed}: parity changed")
    return result


# -- sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    params: Tuple[Tuple[str, float], ...]
    z2: int
    berry_integer: int
    gap: float
    residual_max: float


def _sweep_point(params, model, grid_size, settings) -> SweepRow:
    report = compute_invariant(model, grid_size, settings)
    return SweepRow(
        params=tuple(params),
        z2=report.z2,
        berry_integer=report.berry_integer,
        gap=report.gap.g,
        residual_max=report.residual_max,
    )


def sweep(
    points: Sequence[Tuple[Sequence[Tuple[str, float]], TightBindingModel]],
    grid_size: Optional[int] = None,
    jobs: int = 1,
    settings: Optional[Settings] = None,
) -> List[SweepRow]:
    """
    Evaluate the invariant over many parameter points with a joblib worker
    pool. Rows come back in input order whatever the completion order.
    """
    settings = settings or defaults()
    logger.info("sweeping %d points with %d jobs", len(points), jobs)
    return list(
        Parallel(n_jobs=jobs)(
            delayed(_sweep_point)(params, model, grid_size, settings) for params, model in points
        )
    )


# -- homotopies ---------------------------------------------------------------


@dataclass(frozen=True)
class HomotopyPath:
    """A symmetric family t -> H_t sampled at increasing t in [0, 1]."""

    samples: Tuple[float, ...]
    factory: Callable[[float], TightBindingModel]

    @classmethod
    def linear(cls, factory: Callable[[float], TightBindingModel], steps: int) -> "HomotopyPath":
        return cls(samples=tuple(float(t) for t in np.linspace(0.0, 1.0, steps + 1)), factory=factory)


@dataclass
class HomotopyReport:
    samples: List[float] = field(default_factory=list)
    z2: List[int] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)
    transport_residual: float = 0.0

    @property
    def constant(self) -> bool:
        return len(set(self.z2)) <= 1


def _same_symmetry(a: TightBindingModel, b: TightBindingModel) -> bool:
    if a.symmetry is None or b.symmetry is None:
        return a.symmetry is b.symmetry
    return a.symmetry.kind is b.symmetry.kind and np.allclose(a.symmetry.matrix, b.symmetry.matrix)


def check_homotopy(
    path: HomotopyPath, grid_size: Optional[int] = None, settings: Optional[Settings] = None
) -> HomotopyReport:
    """
    Follow the invariant along a path.

    Consecutive samples must have projections closer than
    settings.homotopy_bisect (else the step is bisected). The symmetric
    frame of each sample is carried to the next one with the Kato-Nagy
    unitary; the carried frame must be a Bloch frame of the next model with
    the same Berry-phase parity.

    Raises:
        PathError: gap closure or unresolvable projector distance at a sample
        InternalConsistencyError: z2 changes along a gapped path
    """
    settings = settings or defaults()
    grid_size = grid_size or settings.transport_grid
    pipelines: Dict[float, Pipeline] = {}
    families: Dict[Tuple[float, int], ProjectionFamily] = {}
    reference = path.factory(path.samples[0])

    def pipeline_at(t: float) -> Pipeline:
        if t not in pipelines:
            model = path.factory(t)
            if not _same_symmetry(model, reference):
                raise PathError("symmetry descriptor changes along the path", sample=t)
            try:
                pipelines[t] = invariant_pipeline(model, grid_size, settings)
            except GapError as exc:
                raise PathError(f"gap closure: {exc}", sample=t) from exc
            except NumericError as exc:
                # certified gap too small for transport to resolve
                raise PathError(f"gap closure suspected: {exc}", sample=t) from exc
        return pipelines[t]

    def family_at(t: float, grid: int) -> ProjectionFamily:
        pipeline = pipeline_at(t)
        if pipeline.transport.grid_size == grid:
            return pipeline.transport.family
        if (t, grid) not in families:
            try:
                families[(t, grid)] = projection_family(path.factory(t), grid, settings)
            except NumericError as exc:
                raise PathError(f"gap closure suspected: {exc}", sample=t) from exc
        return families[(t, grid)]

    report = HomotopyReport()
    first = path.samples[0]
    report.samples.append(first)
    report.z2.append(pipeline_at(first).report.z2)

    pending = [(s, t, 0) for s, t in zip(path.samples[:-1], path.samples[1:])][::-1]
    while pending:
        s, t, depth = pending.pop()
        source = pipeline_at(s)
        target = pipeline_at(t)
        grid = source.transport.grid_size
        P_s = source.transport.family.P
        P_t = family_at(t, grid).P
        distance = float(np.max(np.linalg.norm(P_t - P_s, ord=2, axis=(1, 2))))
        if distance >= settings.homotopy_bisect:
            if depth >= settings.homotopy_max_depth:
                raise PathError(
                    f"projector distance {distance:.3f} does not shrink under bisection (gap closure suspected)",
                    sample=t,
                )
            mid = 0.5 * (s + t)
            logger.info("homotopy: distance %.3f between t=%.4g and t=%.4g, bisecting", distance, s, t)
            pending.append((mid, t, depth + 1))
            pending.append((s, mid, depth + 1))
            continue

        try:
            carried = np.array([kato_nagy(P_t[j], P_s[j]) @ V for j, V in enumerate(source.frame.vectors)])
        except KatoNagyDistanceError as exc:
            raise PathError(str(exc), sample=t) from exc
        carried_frame = BlochFrame(
            grid=source.frame.grid,
            vectors=carried,
            m=source.frame.m,
            family=family_at(t, grid),
            symmetric=source.frame.symmetric,
        )
        residuals = frame_residuals(carried_frame, reference.symmetry)
        report.transport_residual = max(report.transport_residual, max(residuals.values()))
        try:
            carried_parity = berry_phase(carried_frame, "occupied", settings).integer % 2
        except NumericError as exc:
            raise PathError(f"carried frame lost resolution: {exc}", sample=t) from exc

        z2_t = target.report.z2
        if carried_parity != z2_t or z2_t != source.report.z2:
            raise InternalConsistencyError(
                f"z2 changes along a gapped path between t={s:.6g} and t={t:.6g} "
                f"({source.report.z2} -> {z2_t}, carried parity {carried_parity})"
            )
        report.samples.append(t)
        report.z2.append(z2_t)
        report.distances.append(distance)

    return report
