"""
Command-line front end.

Every subcommand builds a JSON payload from `--payload` (inline JSON or a
file) overlaid with its flags, validates it against the owning schema and
prints the result as JSON (or key,value CSV). Exit codes: 0 success,
1 failed verification verdict, 2 domain violation, 3 numerical failure.
"""

import os
import sys
import json
import logging
import argparse
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from . import enable_logging
from .config import get_config, set_config
from .enums import ExitCode, OutputFormat, TransformKind
from .exception import InvalidPayload, PydonskerError
from .functions import Sector, indicator, norm
from .oracle import mollified_product_estimate
from .schema import (
    ApproximantPayload,
    CirclePayload,
    DeltaPayload,
    LocalTimePayload,
    OraclePayload,
    OracleReport,
    ProductPayload,
    ResidualManifest,
    ScaledDeltaPayload,
    SeriesPayload,
    ThetaPayload,
    TransformResult,
    VerifyPayload,
)
from .transforms.circle import (
    RESIDUAL_COLUMNS,
    CircleState,
    WavePacket,
    circle_bound,
    feynman_integral,
    residual_grid,
    t_circle,
)
from .transforms.donsker import (
    DonskerDelta,
    approximant_tail_bound,
    delta_certificate,
    packaged_approximants,
    s_approximant,
    s_delta,
    s_scaled_delta,
    t_delta,
    t_scaled_delta,
)
from .transforms.local_time import (
    LocalTimeQuery,
    local_time_closed_form,
    mollified_local_time,
    occupation_bias_bound,
    occupation_oracle,
    s_local_time,
)
from .transforms.products import DeltaProduct, ProductFactor, s_product, s_product_oracle
from .transforms.series import DeltaSeries, ThetaArgs, partial_sum, s_series, tail_bound, theta
from .verification import run_suite

logger = logging.getLogger("pydonsker")


# ----------------------- Argument helpers
def _element_arg(text: str) -> object:
    return json.loads(text) if text.lstrip()[:1] in ("{", "[") else text


def _load_payload(text: str) -> dict:
    source = Path(text).read_text() if os.path.isfile(text) else text
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise InvalidPayload(f"payload is not valid JSON: {exc}") from None

    if not isinstance(data, dict):
        raise InvalidPayload("payload must be a JSON object")
    return data


def _payload_data(args: argparse.Namespace, fields: Sequence[str]) -> dict:
    data = _load_payload(args.payload) if args.payload else {}
    for field in fields:
        value = getattr(args, field, None)
        if value is not None:
            data[field] = value
    return data


def _factors(pairs: list[list[str]] | None) -> list[dict] | None:
    if not pairs:
        return None
    return [{"f": _element_arg(f), "a": a} for f, a in pairs]


def _modes(pairs: list[list[str]] | None) -> dict | None:
    if not pairs:
        return None
    return {int(l): value for l, value in pairs}


# ----------------------- Handlers
def _delta(args: argparse.Namespace) -> BaseModel:
    p = DeltaPayload(**_payload_data(args, ("t", "a", "xi", "kind")))
    transform = s_delta if p.kind == TransformKind.s else t_delta
    return TransformResult(subcommand="delta", kind=p.kind, value=transform(p.t, p.a, p.xi))


def _scaled_delta(args: argparse.Namespace) -> BaseModel:
    p = ScaledDeltaPayload(**_payload_data(args, ("eta", "a", "z", "alpha", "xi", "kind")))
    d = DonskerDelta(eta=p.eta, a=p.a, z=p.z, sector=Sector(alpha=p.alpha))
    transform = s_scaled_delta if p.kind == TransformKind.s else t_scaled_delta
    cert = delta_certificate(d)
    return TransformResult(
        subcommand="scaled-delta",
        kind=p.kind,
        value=transform(d, p.xi),
        extras={"K1": cert.K1, "K2": cert.K2},
    )


def _approximant(args: argparse.Namespace) -> BaseModel:
    p = ApproximantPayload(**_payload_data(args, ("eta", "n", "z", "a", "alpha", "xi")))
    spec = packaged_approximants(p.eta, [p.n], p.alpha)[0]
    limit = s_scaled_delta(DonskerDelta(eta=p.eta, a=p.a, z=p.z, sector=spec.sector), p.xi)
    return TransformResult(
        subcommand="approximant",
        value=s_approximant(spec, p.z, p.a, p.xi),
        extras={
            "limit": [limit.real, limit.imag],
            "tail_bound": approximant_tail_bound(spec, p.z, p.a, p.xi),
        },
    )


def _product(args: argparse.Namespace) -> BaseModel:
    data = _payload_data(args, ("z", "alpha", "xi", "oracle"))
    if factors := _factors(args.factor):
        data["factors"] = factors
    p = ProductPayload(**data)

    product = DeltaProduct(
        z=p.z,
        factors=tuple(ProductFactor(f=factor.f, a=factor.a) for factor in p.factors),
        sector=Sector(alpha=p.alpha),
    )
    extras = {}
    if p.oracle:
        check = s_product_oracle(product, p.xi)
        extras["oracle"] = [check.real, check.imag]
    return TransformResult(subcommand="product", value=s_product(product, p.xi), extras=extras)


def _series(args: argparse.Namespace) -> BaseModel:
    p = SeriesPayload(**_payload_data(args, ("z", "t", "a", "xi", "N")))
    d = DeltaSeries(z=p.z, t=p.t, a=p.a)
    extras = {}
    if p.N is not None:
        partial = partial_sum(d.base, p.N, p.xi)
        extras = {
            "partial_sum": [partial.value.real, partial.value.imag],
            "tail_bound": tail_bound(d, p.xi, p.N),
            "growth_exponent": partial.growth_exponent,
        }
    return TransformResult(subcommand="series", value=s_series(d, p.xi), extras=extras)


def _theta(args: argparse.Namespace) -> BaseModel:
    p = ThetaPayload(**_payload_data(args, ("rho", "tau", "tol")))
    result = theta(ThetaArgs(rho=p.rho, tau=p.tau), p.tol)
    return TransformResult(
        subcommand="theta",
        value=result.value,
        extras={"truncation": result.truncation, "center": result.center},
    )


def _localtime(args: argparse.Namespace) -> BaseModel:
    p = LocalTimePayload(**_payload_data(args, ("t", "a", "xi", "tol")))
    q = LocalTimeQuery(t=p.t, a=p.a)
    extras = {}
    if norm(p.xi) == 0:
        closed = local_time_closed_form(q.t, q.a)
        extras["closed_form"] = [closed.real, closed.imag]
    return TransformResult(
        subcommand="localtime", value=s_local_time(q, p.xi, p.tol), extras=extras
    )


def _circle(args: argparse.Namespace) -> BaseModel:
    data = _payload_data(args, ("phi0", "t", "s", "xi"))
    if modes := _modes(args.mode):
        data["packet"] = modes
    if args.residual:
        data["residual"] = {
            key: value
            for key, value in (
                ("phi_points", args.phi_points),
                ("t_points", args.t_points),
                ("t_max", args.t_max),
                ("h", args.h),
            )
            if value is not None
        }
    p = CirclePayload(**data)

    packet = WavePacket(coeffs=dict(p.packet), s=p.s)
    if p.residual is not None:
        return _write_residual(packet, p, args.output)

    state = CircleState(phi0=p.phi0, t=p.t, packet=packet)
    value = t_circle(state, p.xi) if state.t > 0 else feynman_integral(state)
    closed = feynman_integral(state)
    return TransformResult(
        subcommand="circle",
        kind="T",
        value=value,
        extras={"feynman_integral": [closed.real, closed.imag], "bound": circle_bound(state, p.xi)},
    )


def _write_residual(packet: WavePacket, p: CirclePayload, output: str | None) -> BaseModel:
    if output is None:
        raise InvalidPayload("the residual table needs --output")

    grid = p.residual
    phi = np.linspace(0.0, 2.0 * np.pi, grid.phi_points, endpoint=False)
    times = np.linspace(grid.t_max / grid.t_points, grid.t_max, grid.t_points)
    table = residual_grid(packet, phi, times, grid.h)

    path = Path(output)
    np.savetxt(path, table, delimiter=",", header=",".join(RESIDUAL_COLUMNS), comments="")

    manifest = ResidualManifest(
        data=path.name,
        columns=list(RESIDUAL_COLUMNS),
        axes={"x": "phi0", "y": "t", "value": "residual"},
        h=grid.h,
        rows=len(table),
        max_residual=float(np.max(table[:, 4])),
    )
    path.with_name(path.name + ".manifest.json").write_text(_to_json(manifest))
    logger.info("Wrote %s residual rows to %s", len(table), path)
    return manifest


def _verify(args: argparse.Namespace) -> BaseModel:
    p = VerifyPayload(**_payload_data(args, ("suite", "trials", "seed")))
    return run_suite(p.suite, p.trials, p.seed)


def _oracle(args: argparse.Namespace) -> BaseModel:
    data = _payload_data(args, ("target", "t", "a", "xi", "eps", "samples", "steps", "seed", "workers"))
    if factors := _factors(args.factor):
        data["factors"] = factors
    p = OraclePayload(**data)

    if p.target == "localtime":
        estimate = occupation_oracle(p.t, p.a.real, p.eps, p.samples, p.steps, p.seed, p.workers)
        reference = local_time_closed_form(p.t, p.a.real)
        bias = occupation_bias_bound(p.t, p.a.real, p.eps, p.steps)
        band_gap = abs(mollified_local_time(p.t, p.a.real, p.eps) - reference)
        bias = max(bias, band_gap)
    else:
        if p.target == "delta":
            family, shifts = [indicator(p.t)], [p.a]
            reference = s_delta(p.t, p.a, p.xi)
        else:
            if not p.factors:
                raise InvalidPayload("the product oracle needs factors")
            family = [factor.f for factor in p.factors]
            shifts = [factor.a for factor in p.factors]
            product = DeltaProduct(
                factors=tuple(ProductFactor(f=f, a=a) for f, a in zip(family, shifts))
            )
            reference = s_product(product, p.xi)
        estimate = mollified_product_estimate(
            family, shifts, p.xi, p.samples, p.seed, workers=p.workers
        )
        bias = 0.0

    return OracleReport(
        target=p.target,
        estimate=estimate,
        reference=reference,
        bias_bound=bias,
        agrees=estimate.agrees_with(reference, bias=bias),
    )


# ----------------------- Output
def _to_json(result: BaseModel) -> str:
    return json.dumps(result.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def _flatten(data: object, prefix: str = "") -> list[tuple[str, object]]:
    if isinstance(data, dict):
        rows = []
        for key in sorted(data):
            rows.extend(_flatten(data[key], f"{prefix}{key}."))
        return rows
    if isinstance(data, list) and all(isinstance(v, (int, float)) for v in data) and len(data) == 2:
        return [(prefix + "re", data[0]), (prefix + "im", data[1])]
    return [(prefix.rstrip("."), data)]


def _to_csv(result: BaseModel) -> str:
    rows = _flatten(result.model_dump(mode="json"))
    return "key,value\n" + "".join(f"{key},{json.dumps(value)}\n" for key, value in rows)


def _emit(result: BaseModel, args: argparse.Namespace) -> None:
    text = _to_csv(result) if args.format == OutputFormat.csv else _to_json(result)
    # the residual table itself goes to --output; its manifest is echoed
    if args.output and not isinstance(result, ResidualManifest):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _diagnose(error: PydonskerError, code: int) -> int:
    line = {
        "error": type(error).__name__,
        "exit_code": code,
        "message": str(error),
        "details": error.details,
    }
    sys.stderr.write(json.dumps(line, sort_keys=True, default=str) + "\n")
    return code


# ----------------------- Parser
HANDLERS: dict[str, Callable[[argparse.Namespace], BaseModel]] = {
    "delta": _delta,
    "scaled-delta": _scaled_delta,
    "approximant": _approximant,
    "product": _product,
    "series": _series,
    "theta": _theta,
    "localtime": _localtime,
    "circle": _circle,
    "verify": _verify,
    "oracle": _oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pydonsker", description="Transforms of Donsker's delta and related Hida distributions"
    )
    parser.add_argument("--log-level", default="WARNING")
    parser.add_argument("--workers", type=int, help="worker threads (default: $PYDONSKER_WORKERS or 1)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help)
        sub.add_argument("--payload", help="JSON object or path to a JSON file")
        sub.add_argument("--output", help="write the result here instead of stdout")
        sub.add_argument("--format", choices=("json", "csv"), default=OutputFormat.json)
        return sub

    delta = command("delta", "S/T-transform of delta(B(t) - a)")
    delta.add_argument("--t")
    delta.add_argument("--a")
    delta.add_argument("--xi", type=_element_arg)
    delta.add_argument("--kind", choices=("S", "T"))

    scaled = command("scaled-delta", "S/T-transform of sigma_z delta(<., eta> - a)")
    scaled.add_argument("--eta", type=_element_arg)
    scaled.add_argument("--a")
    scaled.add_argument("--z")
    scaled.add_argument("--alpha")
    scaled.add_argument("--xi", type=_element_arg)
    scaled.add_argument("--kind", choices=("S", "T"))

    approximant = command("approximant", "S-transform of the regularized approximant phi_{n,z}")
    approximant.add_argument("--eta", type=_element_arg)
    approximant.add_argument("--n")
    approximant.add_argument("--z")
    approximant.add_argument("--a")
    approximant.add_argument("--alpha")
    approximant.add_argument("--xi", type=_element_arg)

    product = command("product", "S-transform of a product of scaled deltas")
    product.add_argument("--z")
    product.add_argument("--alpha")
    product.add_argument("--factor", nargs=2, action="append", metavar=("F", "A"))
    product.add_argument("--xi", type=_element_arg)
    product.add_argument("--oracle", action="store_const", const=True)

    series = command("series", "S-transform of sum_n sigma_z delta(B(t) - a + n)")
    series.add_argument("--z")
    series.add_argument("--t")
    series.add_argument("--a")
    series.add_argument("--xi", type=_element_arg)
    series.add_argument("--N")

    theta_cmd = command("theta", "Jacobi theta function")
    theta_cmd.add_argument("--rho")
    theta_cmd.add_argument("--tau")
    theta_cmd.add_argument("--tol")

    localtime = command("localtime", "S-transform of the local time L(t, a)")
    localtime.add_argument("--t")
    localtime.add_argument("--a")
    localtime.add_argument("--xi", type=_element_arg)
    localtime.add_argument("--tol")

    circle = command("circle", "Particle on a circle: T-transform and Schroedinger residual")
    circle.add_argument("--phi0")
    circle.add_argument("--t")
    circle.add_argument("--s")
    circle.add_argument("--mode", nargs=2, action="append", metavar=("L", "A_L"))
    circle.add_argument("--xi", type=_element_arg)
    circle.add_argument("--residual", action="store_true")
    circle.add_argument("--phi-points", dest="phi_points")
    circle.add_argument("--t-points", dest="t_points")
    circle.add_argument("--t-max", dest="t_max")
    circle.add_argument("--h")

    verify = command("verify", "Randomized verification suites")
    verify.add_argument("--suite", choices=("homogeneity", "growth", "roundtrip", "sector", "series"))
    verify.add_argument("--trials")
    verify.add_argument("--seed")

    oracle = command("oracle", "Monte Carlo cross-checks")
    oracle.add_argument("--target", choices=("delta", "product", "localtime"))
    oracle.add_argument("--t")
    oracle.add_argument("--a")
    oracle.add_argument("--xi", type=_element_arg)
    oracle.add_argument("--factor", nargs=2, action="append", metavar=("F", "A"))
    oracle.add_argument("--eps")
    oracle.add_argument("--samples")
    oracle.add_argument("--steps")
    oracle.add_argument("--seed")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    enable_logging(args.log_level)

    if args.workers is not None:
        set_config(get_config().model_copy(update={"workers": args.workers}))

    logger.info("Running %s", args.command)
    try:
        result = HANDLERS[args.command](args)
    except ValidationError as exc:
        error = InvalidPayload(
            "payload does not match the schema", {"errors": exc.errors(include_url=False)}
        )
        return _diagnose(error, ExitCode.domain)
    except PydonskerError as exc:
        return _diagnose(exc, exc.exit_code)
    except ValueError as exc:
        return _diagnose(InvalidPayload(str(exc)), ExitCode.domain)

    _emit(result, args)
    if getattr(result, "verdict", True) is False:
        return ExitCode.failed
    return ExitCode.ok


if __name__ == "__main__":
    sys.exit(main())
