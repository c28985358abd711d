"""End-to-end heteroclinic proofs.

A proof runs three validated stages and one final check:

1. a steady state ``ũ`` with its unstable eigenpair (`.equilibria`),
2. a chart of the local unstable manifold of ``ũ`` (`.manifold`),
3. rigorous forward integration from a point on that manifold (`.integrator`),
4. a stable ball around constant data that contains the last enclosure (`.globalexist`).

The resulting `ProofCertificate` establishes an orbit that leaves ``ũ`` as ``t → −∞``
and converges to zero as ``t → +∞``. Orbits related by conjugation and by rescaling are
obtained from a certificate through `conjugate_certificate` and `rescale_certificate`.
"""

from __future__ import annotations

import hashlib
import logging
import math
import time
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Iterable, Literal

import attrs
import numpy as np
from attrs import field, frozen
from attrs.validators import ge, in_, instance_of
from tqdm.auto import tqdm

from nlscap import settings
from nlscap._implementers import implement_pretty_repr
from nlscap.equilibria import (
    EquilibriumProblem,
    NoConvergenceError,
    ValidationCertificate,
    load_family,
    prove_equilibrium,
)
from nlscap.globalexist import (
    AmbiguousSectorError,
    StableBallParams,
    StableSetError,
    classify_sector,
    optimal_radius,
    perturbation_norm,
    stable_inequality,
    verify_stable,
)
from nlscap.integrator import (
    KappaError,
    MarchSchedule,
    StepCertificate,
    StepFailure,
    build_Uh,
    compute_W0,
    defect,
    enclosure_gap,
    initial_errors,
    reference_orbit,
    tail_constants,
    time_march,
)
from nlscap.interval import ComplexInterval, RealInterval, add_upper, modulus
from nlscap.manifold import (
    AssumptionError,
    ManifoldCertificate,
    ManifoldProblem,
    ResonanceError,
    eval_P,
    solve_recurrence,
    validate_manifold,
)
from nlscap.radii import ValidationError, validation_slack
from nlscap.seqspace import CosineSeq, weights
from nlscap.settings import NumberOfThreads, Sector, StopPolicy

_LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
Stage = Literal["equilibrium", "manifold", "integration", "stable-set"]


class ProofError(RuntimeError):
    """A proof stage failed; ``stage`` names it."""

    def __init__(self, message: str, stage: Stage) -> None:
        super().__init__(message)
        self.stage = stage

    def __reduce__(self) -> tuple[type, tuple[str, Stage]]:
        return type(self), (self.args[0], self.stage)


def _to_manifold_problem(value: Any) -> ManifoldProblem:
    if isinstance(value, ManifoldProblem):
        return value
    return ManifoldProblem(**{"theta": settings.DEFAULT_THETA, **value})


def _to_schedule(value: Any) -> MarchSchedule:
    if isinstance(value, MarchSchedule):
        return value
    return MarchSchedule(**value)


def _to_stop_policy(value: Any) -> StopPolicy:
    if isinstance(value, StopPolicy):
        return value
    return StopPolicy.from_str(str(value))


def _to_optional_str(value: Any) -> str | None:
    if value is None:
        return None
    return str(value)


@implement_pretty_repr
@frozen
class ProofConfig:
    """Parameters of one heteroclinic proof.

    Keys of configuration files map one-to-one onto the fields; ``manifold`` and
    ``schedule`` are nested tables with the fields of `.ManifoldProblem` and
    `.MarchSchedule`.
    """

    family: str = "u1"
    """Name of a shipped equilibrium family, see `.family_names`."""
    seed_file: str | None = field(default=None, converter=_to_optional_str)
    """File with seed coefficients; takes precedence over ``family``."""
    m: int = field(default=28, validator=[instance_of(int), ge(2)])
    nu: float = field(default=settings.DEFAULT_NU, converter=float, validator=ge(1.0))
    mode: int | None = None
    """Eigenvalue to follow; `None` selects the most unstable one."""
    manifold: ManifoldProblem = field(
        factory=lambda: ManifoldProblem(K=27, M=150, theta=settings.DEFAULT_THETA),
        converter=_to_manifold_problem,
    )
    sigma: int = field(default=1, validator=in_((1, -1)))
    """Manifold parameter ``σ = ±1`` of the starting point ``P(σ)``."""
    scan_theta: bool = False
    """Choose the eigenvector angle with a nonrigorous pre-scan."""
    schedule: MarchSchedule = field(factory=MarchSchedule, converter=_to_schedule)
    stop_policy: StopPolicy = field(
        default=StopPolicy.STABLE_SET, converter=_to_stop_policy
    )
    output: str | None = field(default=None, converter=_to_optional_str)

    def __attrs_post_init__(self) -> None:
        for name, value in [("manifold", self.manifold.nu), ("schedule", self.schedule.nu)]:
            if value != self.nu:
                msg = f"Weight ν = {value} of the {name} differs from ν = {self.nu}"
                raise ValueError(msg)

    @property
    def equilibrium_name(self) -> str:
        if self.seed_file is not None:
            return Path(self.seed_file).stem
        return self.family


def _conjugate_name(name: str) -> str:
    suffix = "-conjugate"
    if name.endswith(suffix):
        return name[: -len(suffix)]
    return name + suffix


@implement_pretty_repr
@frozen(eq=False)
class ProofCertificate:
    """Recheckable record of a heteroclinic proof.

    The computed orbit runs from the equilibrium to zero. ``conjugated`` marks the
    time-reversed conjugate orbit ``u(−t)*`` and ``rescaling`` the member
    ``n^{2/(p−1)} u(n²t, nx)`` of the rescaled family.
    """

    config: ProofConfig
    equilibrium: ValidationCertificate
    manifold: ManifoldCertificate
    steps: tuple[StepCertificate, ...] = field(converter=tuple)
    stable: StableBallParams
    conjugated: bool = False
    rescaling: int = field(default=1, validator=[instance_of(int), ge(1)])
    schema_version: str = SCHEMA_VERSION

    @property
    def t_end(self) -> float:
        if not self.steps:
            return 0.0
        return self.steps[-1].t_end

    @property
    def final_radii(self) -> tuple[float, float]:
        if not self.steps:
            return 0.0, 0.0
        return self.steps[-1].rho0, self.steps[-1].rho_inf

    @property
    def limits(self) -> tuple[str, str]:
        """Limits of the certified orbit as ``t → −∞`` and ``t → +∞``."""
        name = self.config.equilibrium_name
        if self.conjugated:
            return "0", _conjugate_name(name)
        return name, "0"

    @property
    def amplitude_factor(self) -> float:
        return float(self.rescaling) ** (2 / (self.stable.p - 1))

    @property
    def time_factor(self) -> int:
        return self.rescaling**2

    @property
    def mode_dilation(self) -> int:
        return self.rescaling


def load_seed(config: ProofConfig) -> Any:
    if config.seed_file is None:
        return load_family(config.family, config.m)
    from nlscap import io  # noqa: PLC0415

    return io.load_seed(config.seed_file)


def try_stable(a_end: CosineSeq, p: int = 2) -> StableBallParams | None:
    """`.verify_stable` that reports failure as `None`."""
    try:
        return verify_stable(a_end, p)
    except (StableSetError, AmbiguousSectorError) as exc:
        _LOGGER.debug(f"Stable-set check failed: {exc}")
        return None


def prove_heteroclinic(config: ProofConfig) -> ProofCertificate:
    """Run all stages of a proof; raises `ProofError` naming the failing stage."""
    start = time.perf_counter()
    problem = EquilibriumProblem(config.m, config.nu)
    try:
        equilibrium = prove_equilibrium(problem, load_seed(config), mode=config.mode)
    except (ValidationError, NoConvergenceError, KeyError, OSError, ValueError) as exc:
        msg = f"Equilibrium stage failed for {config.equilibrium_name}: {exc}"
        raise ProofError(msg, "equilibrium") from exc

    manifold_problem = config.manifold
    if config.scan_theta:
        theta = scan_theta(equilibrium, config)
        if theta is not None:
            manifold_problem = attrs.evolve(manifold_problem, theta=theta)
    try:
        manifold = validate_manifold(equilibrium, manifold_problem)
    except (ValidationError, ResonanceError, AssumptionError, ValueError) as exc:
        msg = f"Manifold stage failed: {exc}"
        raise ProofError(msg, "manifold") from exc

    initial = eval_P(manifold, None, float(config.sigma))
    found: list[StableBallParams] = []

    def stop(step: StepCertificate) -> bool:
        params = try_stable(step.endpoint_enclosure())
        if params is not None:
            found.append(params)
        return params is not None

    try:
        steps = time_march(
            initial,
            config.schedule,
            stop=stop if config.stop_policy is StopPolicy.STABLE_SET else None,
        )
    except StepFailure as exc:
        msg = f"Integration stage failed: {exc}"
        raise ProofError(msg, "integration") from exc

    stable = found[-1] if found else try_stable(steps[-1].endpoint_enclosure())
    if stable is None:
        msg = (
            f"No stable ball contains the enclosure after {len(steps)} steps"
            f" (t = {steps[-1].t_end:.6g})"
        )
        raise ProofError(msg, "stable-set")
    _LOGGER.info(
        f"Proved {config.equilibrium_name} → 0 with σ = {config.sigma:+d} after"
        f" {len(steps)} steps (t = {steps[-1].t_end:.6g}, ρ0 = {stable.rho0:.4g},"
        f" ρ1 = {stable.rho1:.3e}, r = {stable.r:.3e}) in"
        f" {time.perf_counter() - start:.1f} s"
    )
    evolved_config = attrs.evolve(config, manifold=manifold_problem)
    return ProofCertificate(evolved_config, equilibrium, manifold, steps, stable)


def prove_many(configs: Iterable[ProofConfig]) -> list[ProofCertificate]:
    """Run independent proofs, in parallel when `.NumberOfThreads` allows."""
    configs = list(configs)
    number_of_threads = NumberOfThreads.get()
    progress_bar = tqdm(
        total=len(configs),
        desc="Proving",
        disable=_LOGGER.level > logging.WARNING,
    )
    certificates: list[ProofCertificate] = []
    if number_of_threads > 1 and len(configs) > 1:
        with Pool(min(number_of_threads, len(configs))) as pool:
            for certificate in pool.imap(prove_heteroclinic, configs, chunksize=1):
                certificates.append(certificate)
                progress_bar.update()
    else:
        for config in configs:
            certificates.append(prove_heteroclinic(config))
            progress_bar.update()
    progress_bar.close()
    return certificates


def _stable_in_floats(row: np.ndarray, nu: float, p: int = 2) -> bool:
    z0 = complex(row[0])
    if z0 == 0 or (z0 ** (p - 1)).imag < 0:
        return False
    rho0 = abs(z0)
    rest = float(np.sum(weights(nu, row.size).mid[1:] * np.abs(row[1:])))
    rho1 = rest / rho0**p
    r = optimal_radius(rho0, p)
    return float(stable_inequality(rho0, rho1, r, p).mid) < 0


def scan_theta(
    equilibrium: ValidationCertificate,
    config: ProofConfig,
    thetas: Iterable[float] | None = None,
) -> float | None:
    """Nonrigorous search for the eigenvector angle whose orbit enters the stable set first.

    Rotating the eigenvector by θ maps ``p̄_m`` to ``e^{imθ} p̄_m``, so a single
    recurrence serves every angle. Returns `None` if no sampled orbit enters the set.
    """
    if thetas is None:
        thetas = np.linspace(0, 2 * np.pi, settings.THETA_SCAN_SIZE, endpoint=False)
    thetas = np.asarray(list(thetas), dtype=float)
    coefficients = solve_recurrence(
        equilibrium.candidate, attrs.evolve(config.manifold, theta=0.0)
    ).mid
    schedule = config.schedule
    times = np.concatenate([
        [0.0],
        np.cumsum([schedule.step_size(i) for i in range(schedule.max_steps)]),
    ])
    orders = np.arange(coefficients.shape[0])
    best: float | None = None
    best_time = math.inf
    progress_bar = tqdm(
        total=len(thetas),
        desc="Scanning eigenvector angles",
        disable=_LOGGER.level > logging.WARNING,
    )
    for theta in thetas:
        progress_bar.update()
        start = (config.sigma * np.exp(1j * theta)) ** orders @ coefficients
        try:
            orbit = reference_orbit(start, times, schedule.fourier_K)
        except RuntimeError as exc:
            _LOGGER.debug(f"θ = {theta:.4f}: {exc}")
            continue
        hits = [t for t, row in zip(times[1:], orbit[1:]) if _stable_in_floats(row, config.nu)]
        if hits and hits[0] < best_time:
            best, best_time = float(theta), hits[0]
    progress_bar.close()
    if best is None:
        _LOGGER.warning(
            f"No sampled angle reaches the stable set within t = {times[-1]:.4g};"
            f" keeping θ = {config.manifold.theta}"
        )
    else:
        _LOGGER.info(f"Selected θ = {best:.6f}, stable set reached near t = {best_time:.4g}")
    return best


def conjugate_certificate(certificate: ProofCertificate) -> ProofCertificate:
    """Certificate of the orbit ``w(t, x) = u(−t, x)*``; no numbers change."""
    return attrs.evolve(certificate, conjugated=not certificate.conjugated)


def rescale_certificate(certificate: ProofCertificate, n: int) -> ProofCertificate:
    """Certificate of ``u_n(t, x) = n^{2/(p−1)} u(n²t, nx)``."""
    if not isinstance(n, int) or n < 1:
        msg = f"Rescaling index must be a positive integer, got {n!r}"
        raise ValueError(msg)
    return attrs.evolve(certificate, rescaling=certificate.rescaling * n)


@frozen
class Check:
    """One re-evaluated inequality; ``value ≤ 0`` means it holds."""

    name: str
    value: float
    passed: bool


@implement_pretty_repr
@frozen
class RecheckReport:
    checks: tuple[Check, ...] = field(converter=tuple)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[Check]:
        return [check for check in self.checks if not check.passed]


def _check(name: str, value: float) -> Check:
    return Check(name, float(value), bool(value <= 0))


def _upper_excess(computed: Iterable[float], stored: Iterable[float]) -> float:
    """Largest amount by which a recomputed upper bound exceeds its stored value."""
    return max(float(c) - float(s) for c, s in zip(computed, stored))


def _step_checks(
    step: StepCertificate, previous: StepCertificate | None, *, full: bool
) -> list[Check]:
    label = f"step {step.index}"
    solution = step.solution
    evolution = step.evolution
    checks = [
        _check(f"{label}: κ > 0", -evolution.kappa),
        _check(f"{label}: ‖ā‖ bound", solution.norm_upper() - step.abar_norm),
        _check(
            f"{label}: tail constants",
            _upper_excess(
                tail_constants(step.abar_norm, solution.h),
                (evolution.W_inf, evolution.barW_inf, evolution.W_inf_sup),
            ),
        ),
    ]
    try:
        recomputed = build_Uh(
            evolution.W0,
            (evolution.W_inf, evolution.barW_inf, evolution.W_inf_sup),
            solution.tail_norm_upper(),
            solution.tail_dual_upper(),
        )
        excess = _upper_excess(recomputed.Uh.ravel(), evolution.Uh.ravel())
    except KappaError:
        excess = math.inf
    checks.append(_check(f"{label}: U_h", excess))
    image_ok = step.verify()
    checks.append(Check(f"{label}: f_ε(ϱ) ≤ ϱ", 0.0 if image_ok else math.inf, image_ok))
    if previous is not None:
        gap0, gap_inf = enclosure_gap(
            previous.solution.endpoint(), solution.initial(), solution.nu
        )
        checks.append(
            _check(
                f"{label}: ε from step {previous.index}",
                _upper_excess(
                    (add_upper(previous.rho0, gap0), add_upper(previous.rho_inf, gap_inf)),
                    (step.eps0, step.eps_inf),
                ),
            )
        )
        checks.append(_check(f"{label}: contiguous in time", abs(solution.t0 - previous.t_end)))
    if full:
        checks.append(
            _check(
                f"{label}: defect",
                _upper_excess(defect(solution), (step.delta0, step.delta_inf)),
            )
        )
        checks.append(
            _check(
                f"{label}: W0",
                compute_W0(solution.coeffs[:, 0], solution.h) - evolution.W0,
            )
        )
    return checks


def _stable_checks(certificate: ProofCertificate) -> list[Check]:
    stable = certificate.stable
    margin = float(stable_inequality(stable.rho0, stable.rho1, stable.r, stable.p).hi)
    checks = [Check("stable set: inequality", margin, margin < 0)]
    if not certificate.steps:
        return checks
    a_end = certificate.steps[-1].endpoint_enclosure()
    z0 = ComplexInterval.point(stable.z0)
    size = modulus(z0)
    rho1 = RealInterval.point(perturbation_norm(a_end, stable.z0)) / size**stable.p
    checks.append(_check("stable set: ρ0 ≥ |z0|", float(size.hi) - stable.rho0))
    checks.append(_check("stable set: ρ1 bound", float(rho1.hi) - stable.rho1))
    try:
        forward = classify_sector(z0, stable.p) is Sector.FORWARD
    except AmbiguousSectorError:
        forward = False
    checks.append(Check("stable set: forward sector", 0.0 if forward else math.inf, forward))
    return checks


def recheck(certificate: ProofCertificate, *, full: bool = False) -> RecheckReport:
    """Re-evaluate every stored inequality of a certificate.

    Only stored enclosures are used. With ``full``, the defects and the zero-mode
    growth factors of every step are recomputed as well.
    """
    checks = [
        _check(
            "equilibrium: radii polynomial",
            float(validation_slack(certificate.equilibrium.bounds).hi),
        ),
        _check(
            "manifold: radii polynomial",
            float(validation_slack(certificate.manifold.bounds).hi),
        ),
    ]
    steps = certificate.steps
    if steps:
        initial = eval_P(certificate.manifold, None, float(certificate.config.sigma))
        checks.append(
            _check(
                "manifold → integrator: ε",
                _upper_excess(
                    initial_errors(initial, steps[0].solution),
                    (steps[0].eps0, steps[0].eps_inf),
                ),
            )
        )
    previous: StepCertificate | None = None
    for step in steps:
        checks.extend(_step_checks(step, previous, full=full))
        previous = step
    checks.extend(_stable_checks(certificate))
    report = RecheckReport(checks)
    if report.passed:
        _LOGGER.info(f"All {len(report.checks)} checks passed")
    else:
        for failure in report.failures():
            _LOGGER.warning(f"Check failed: {failure.name} ({failure.value:.3e})")
    return report


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as stream:
        for chunk in iter(lambda: stream.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _package_version() -> str:
    from importlib.metadata import PackageNotFoundError, version  # noqa: PLC0415

    try:
        return version("nls-cap")
    except PackageNotFoundError:
        return "unknown"


def export(
    certificate: ProofCertificate,
    output_dir: str | Path,
    formats: Iterable[str] = ("json", "csv", "plots"),
    *,
    x_points: int = 32,
) -> dict[str, Path]:
    """Write the certificate and its plot data into ``output_dir``.

    Formats are ``json`` (``certificate.json``), ``csv`` (``steps.csv``) and ``plots``
    (``orbit.csv``); ``manifest.json`` with the file hashes is always written. The CSV
    files are skipped when there are no steps.
    """
    from nlscap import io  # noqa: PLC0415

    formats = set(formats)
    unknown = formats - {"json", "csv", "plots"}
    if unknown:
        msg = f"Unknown export formats: {', '.join(sorted(unknown))}"
        raise ValueError(msg)
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    if "json" in formats:
        written["certificate"] = directory / "certificate.json"
        io.write(certificate, written["certificate"])
    if certificate.steps and "csv" in formats:
        written["steps"] = directory / "steps.csv"
        io.write_steps_csv(certificate.steps, written["steps"])
    if certificate.steps and "plots" in formats:
        written["orbit"] = directory / "orbit.csv"
        io.write_orbit_csv(certificate, written["orbit"], x_points=x_points)
    manifest = {
        "package": "nls-cap",
        "version": _package_version(),
        "schema_version": certificate.schema_version,
        "limits": list(certificate.limits),
        "conjugated": certificate.conjugated,
        "rescaling": certificate.rescaling,
        "config": io.asdict(certificate.config),
        "files": {path.name: _sha256(path) for path in written.values()},
    }
    written["manifest"] = directory / "manifest.json"
    io.write(manifest, written["manifest"])
    _LOGGER.info(f"Exported {', '.join(sorted(written))} to {directory}")
    return written
