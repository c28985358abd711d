"""Command line interface ``nls-cap``.

Every stage of a proof can be run on its own, with certificates handed from one
command to the next as files, or all at once through ``nls-cap prove``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import jsonschema

from nlscap import io
from nlscap.equilibria import (
    EquilibriumProblem,
    NoConvergenceError,
    ValidationCertificate,
    family_names,
    load_family,
    prove_equilibrium,
)
from nlscap.globalexist import (
    AmbiguousSectorError,
    StableSetError,
    phase_portrait,
    verify_stable,
)
from nlscap.integrator import MarchSchedule, StepCertificate, StepFailure, time_march
from nlscap.manifold import (
    AssumptionError,
    ManifoldCertificate,
    ManifoldProblem,
    ResonanceError,
    eval_P,
    validate_manifold,
)
from nlscap.pipeline import (
    ProofCertificate,
    ProofError,
    conjugate_certificate,
    export,
    prove_heteroclinic,
    recheck,
    rescale_certificate,
    try_stable,
)
from nlscap.radii import ValidationError
from nlscap.seqspace import CosineSeq
from nlscap.settings import DEFAULT_NU, DEFAULT_THETA, NumberOfThreads, StopPolicy

_LOGGER = logging.getLogger(__name__)

_FAILURES = (
    ProofError,
    StepFailure,
    ValidationError,
    NoConvergenceError,
    ResonanceError,
    AssumptionError,
    StableSetError,
    AmbiguousSectorError,
    jsonschema.ValidationError,
    OSError,
    ValueError,
)


def _emit(line: str) -> None:
    sys.stdout.write(line + "\n")


def _read(loader: Callable[[Path], Any], path: Path) -> Any:
    try:
        return loader(path)
    except NotImplementedError as exc:
        msg = f"Cannot read {path}: {exc}"
        raise ValueError(msg) from exc


def _load_as(path: Path, expected: type | tuple[type, ...]) -> Any:
    instance = _read(io.load, path)
    if not isinstance(instance, expected):
        msg = f"{path} holds a {type(instance).__name__}, not what this command expects"
        raise ValueError(msg)
    return instance


def _equilibrium(args: argparse.Namespace) -> int:
    problem = EquilibriumProblem(args.modes, args.nu)
    if args.seed is not None:
        seed = _read(io.load_seed, args.seed)
    else:
        seed = load_family(args.family, args.modes)
    certificate = prove_equilibrium(problem, seed, mode=args.mode)
    io.write(certificate, args.out)
    _emit(
        f"λ = {certificate.candidate.lambda_bar:.12g}, r0 = {certificate.r_star:.3e}"
        f" → {args.out}"
    )
    return 0


def _manifold(args: argparse.Namespace) -> int:
    equilibrium: ValidationCertificate = _load_as(args.equilibrium, ValidationCertificate)
    problem = ManifoldProblem(
        K=args.K,
        M=args.M,
        alpha_l2=args.alpha_l2,
        theta=args.theta,
        nu=equilibrium.problem.nu,
    )
    certificate = validate_manifold(equilibrium, problem)
    io.write(certificate, args.out)
    _emit(f"r_p = {certificate.r_p:.3e} → {args.out}")
    if args.emit_endpoint is not None:
        sigma, path = args.emit_endpoint
        endpoint = eval_P(certificate, None, float(sigma))
        io.write(endpoint, path)
        _emit(f"P({int(sigma):+d}) with error {endpoint.tail:.3e} → {path}")
    return 0


def _integrate(args: argparse.Namespace) -> int:
    initial: CosineSeq = _load_as(args.initial, CosineSeq)
    schedule = MarchSchedule(
        h=args.h,
        n_cheb=args.cheb_N,
        fourier_K=args.fourier_K,
        max_steps=args.max_steps,
        nu=initial.nu,
    )
    stop_policy = StopPolicy.from_str(args.stop)

    def stop(step: StepCertificate) -> bool:
        return try_stable(step.endpoint_enclosure()) is not None

    steps = time_march(
        initial,
        schedule,
        args.eps0,
        args.epsinf,
        stop=stop if stop_policy is StopPolicy.STABLE_SET else None,
    )
    io.write(steps, args.out)
    if args.csv is not None:
        io.write_steps_csv(steps, args.csv)
    last = steps[-1]
    _emit(
        f"{len(steps)} steps to t = {last.t_end:.6g}, ϱ = ({last.rho0:.3e},"
        f" {last.rho_inf:.3e}) → {args.out}"
    )
    return 0


def _verify_stable(args: argparse.Namespace) -> int:
    loaded = _load_as(args.endpoint, (CosineSeq, tuple))
    if isinstance(loaded, tuple):
        loaded = loaded[-1].endpoint_enclosure()
    params = verify_stable(loaded, args.p)
    _emit(
        f"stable: ρ0 = {params.rho0:.6g}, ρ1 = {params.rho1:.3e}, r = {params.r:.3e},"
        f" margin = {params.margin:.3e}"
    )
    return 0


def _portrait(args: argparse.Namespace) -> int:
    portrait = phase_portrait(args.p, args.grid, args.extent, args.trajectories)
    field_path, trajectory_path = io.write_portrait_csv(portrait, args.out)
    _emit(f"vector field → {field_path}, trajectories → {trajectory_path}")
    return 0


def _prove(args: argparse.Namespace) -> int:
    config = _read(io.load_config, args.config)
    certificate = prove_heteroclinic(config)
    output = args.out or config.output or "certificate.json"
    io.write(certificate, output)
    stable = certificate.stable
    start, end = certificate.limits
    _emit(
        f"{start} → {end}: {len(certificate.steps)} steps to t ="
        f" {certificate.t_end:.6g}, stable ball ρ0 = {stable.rho0:.6g} → {output}"
    )
    return 0


def _recheck(args: argparse.Namespace) -> int:
    certificate: ProofCertificate = _load_as(args.certificate, ProofCertificate)
    report = recheck(certificate, full=args.full)
    for check in report.checks:
        if args.verbose or not check.passed:
            status = "ok  " if check.passed else "FAIL"
            _emit(f"{status} {check.name} ({check.value:.3e})")
    _emit(f"{len(report.checks) - len(report.failures())}/{len(report.checks)} checks passed")
    return 0 if report.passed else 1


def _export(args: argparse.Namespace) -> int:
    certificate: ProofCertificate = _load_as(args.certificate, ProofCertificate)
    if args.conjugate:
        certificate = conjugate_certificate(certificate)
    if args.rescale != 1:
        certificate = rescale_certificate(certificate, args.rescale)
    formats = ["json"]
    if args.csv:
        formats.append("csv")
    if args.plots:
        formats.append("plots")
    written = export(certificate, args.out_dir, formats, x_points=args.x_points)
    for path in written.values():
        _emit(str(path))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nls-cap",
        description=(
            "Computer-assisted proofs of heteroclinic orbits for −i u_t = u_xx + u² on"
            " the torus."
        ),
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--threads", type=int, default=None)
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable[[argparse.Namespace], int], text: str) -> Any:
        subparser = subparsers.add_parser(name, help=text, description=text)
        subparser.set_defaults(handler=handler)
        return subparser

    equilibrium = add("equilibrium", _equilibrium, "Validate a steady state and eigenpair")
    seed = equilibrium.add_mutually_exclusive_group()
    seed.add_argument("--seed", type=Path)
    seed.add_argument("--family", default="u1", choices=family_names())
    equilibrium.add_argument("--modes", type=int, default=28)
    equilibrium.add_argument("--nu", type=float, default=DEFAULT_NU)
    equilibrium.add_argument("--mode", type=int, default=None)
    equilibrium.add_argument("--out", type=Path, default=Path("equilibrium.json"))

    manifold = add("manifold", _manifold, "Validate the local unstable manifold")
    manifold.add_argument("--equilibrium", type=Path, required=True)
    manifold.add_argument("--K", type=int, default=27)
    manifold.add_argument("--M", type=int, default=150)
    manifold.add_argument("--alpha-l2", type=float, default=20.0)
    manifold.add_argument("--theta", type=float, default=DEFAULT_THETA)
    manifold.add_argument("--out", type=Path, default=Path("manifold.json"))
    manifold.add_argument(
        "--emit-endpoint",
        nargs=2,
        metavar=("SIGMA", "PATH"),
        default=None,
        help="write the enclosure of P(σ) for σ = ±1 to a .seq file",
    )

    integrate = add("integrate", _integrate, "Integrate rigorously from an enclosure")
    integrate.add_argument("--initial", type=Path, required=True)
    integrate.add_argument("--eps0", type=float, default=0.0)
    integrate.add_argument("--epsinf", type=float, default=0.0)
    integrate.add_argument("--h", type=float, default=2.5e-3)
    integrate.add_argument("--cheb-N", type=int, default=13)
    integrate.add_argument("--fourier-K", type=int, default=27)
    integrate.add_argument("--max-steps", type=int, default=20)
    integrate.add_argument("--stop", default="stable-set", choices=["stable-set", "max-steps"])
    integrate.add_argument("--out", type=Path, default=Path("steps.json"))
    integrate.add_argument("--csv", type=Path, default=None)

    stable = add("verify-stable", _verify_stable, "Check the stable set around constants")
    stable.add_argument("--endpoint", type=Path, required=True)
    stable.add_argument("--p", type=int, default=2)

    portrait = add("portrait", _portrait, "Sample the dynamics of ż = i z^p")
    portrait.add_argument("--p", type=int, default=2)
    portrait.add_argument("--grid", type=int, default=64)
    portrait.add_argument("--extent", type=float, default=1.5)
    portrait.add_argument("--trajectories", type=int, default=8)
    portrait.add_argument("--out", type=Path, default=Path("portrait.csv"))

    prove = add("prove", _prove, "Run a complete heteroclinic proof")
    prove.add_argument("--config", type=Path, required=True)
    prove.add_argument("--out", type=Path, default=None)

    recheck_parser = add("recheck", _recheck, "Re-evaluate a stored certificate")
    recheck_parser.add_argument("certificate", type=Path)
    recheck_parser.add_argument(
        "--full", action="store_true", help="also recompute defects and W0"
    )

    export_parser = add("export", _export, "Write certificate data for plotting")
    export_parser.add_argument("certificate", type=Path)
    export_parser.add_argument("--csv", action="store_true")
    export_parser.add_argument("--plots", action="store_true")
    export_parser.add_argument("--out-dir", type=Path, default=Path())
    export_parser.add_argument("--x-points", type=int, default=32)
    export_parser.add_argument("--conjugate", action="store_true")
    export_parser.add_argument("--rescale", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.threads is not None:
        NumberOfThreads.set(args.threads)
    try:
        return args.handler(args)
    except _FAILURES as exc:
        message = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        sys.stderr.write(f"nls-cap {args.command}: {message}\n")
        _LOGGER.debug("Traceback", exc_info=exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
