"""cmgraphs のコマンドラインインターフェース。

各サブコマンドはモジュールの操作を一つ呼び、報告を標準出力に書きます。

使用例:
    cmgraphs classpoly -23
    cmgraphs heegner 0,0,1,-1,0 -7
    cmgraphs relations 0,0,1,-1,0 "(0,0);(1,0)"
    cmgraphs scan 0,0,1,-1,0 --n 2 --delta-max 200 --workers 4
    cmgraphs sweep 2000 --format csv

終了コード: 0 成功、2 入力が不正、3 現在の精度では判定不能、4 内部エラー。
"""

import argparse
import asyncio
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence

import mpmath
import yaml
from pydantic import ValidationError

from .arith.modular import modular_polynomial, psi
from .arith.quadforms import class_number, hilbert_class_poly, tau_of_form
from .cache.store import CacheStore
from .census.experiments import coefficient_growth, class_number_sweep
from .census.scan import (
    gamma_sigma_intersection_async,
    scan_tuples_async,
    u_special_scan_async,
)
from .config.loader import ConfigLoader, RunConfig
from .core.errors import CmGraphsError, InvalidInputError
from .core.interfaces import Output
from .curves.elliptic import CurveQ, Point, point_order
from .curves.modparam import (
    CorrespondenceSpec,
    build_param_map,
    heegner_point,
    phi_eval,
    torsion_order_of,
)
from .outputs.console import ConsoleOutput
from .outputs.file import FileOutput
from .relations.lattice import (
    DEFAULT_COEFF_CAP,
    relation_lattice,
    smallest_torsion_coset,
)
from .utils.logger import get_logger, init_logging

logger = get_logger(__name__)

REPORT_VERSION = 1

Command = Callable[
    [argparse.Namespace, RunConfig, CacheStore], Awaitable[Dict[str, Any]]
]


def _provenance(config: RunConfig, command: str, **extra: Any) -> Dict[str, Any]:
    block: Dict[str, Any] = {
        "version": REPORT_VERSION,
        "command": command,
        "prec": config.prec,
    }
    block.update(extra)
    return block


def _parse_curve(args: argparse.Namespace) -> CurveQ:
    return CurveQ.parse(args.curve, conductor=args.conductor)


def _parse_points(text: str) -> List[Point]:
    return [Point.parse(part) for part in text.split(";") if part.strip()]


def parse_tau(text: str, prec: int) -> Any:
    """"a,b,c"（形式の根）、カスプ "oo" と有理数、または複素数の小数表記。"""
    body = text.strip()
    if body.lower() in ("oo", "inf", "infinity"):
        return body.lower()
    parts = [p.strip() for p in body.strip("()").split(",")]
    if len(parts) == 3:
        try:
            form = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise InvalidInputError(f"form must be three integers: {text!r}") from exc
        if form[0] <= 0 or form[1] ** 2 - 4 * form[0] * form[2] >= 0:
            raise InvalidInputError(f"not a positive definite form: {text!r}")
        return tau_of_form(form, prec)
    try:
        return Fraction(body)
    except ValueError:
        pass
    try:
        with mpmath.workprec(prec + 32):
            value = mpmath.mpc(mpmath.mpmathify(body))
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"cannot parse tau: {text!r}") from exc
    if value.imag <= 0:
        raise InvalidInputError(f"not in upper half plane: {text}")
    return value


def _complex_point(point) -> Dict[str, Any]:
    if point.infinity:
        return {"infinity": True}
    return {"infinity": False, "x": point.x, "y": point.y, "err": point.err}


async def cmd_classpoly(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    poly = hilbert_class_poly(args.disc, config.prec, cache)
    return {
        "kind": "classpoly",
        "disc": args.disc,
        "class_number": class_number(args.disc),
        "polynomial": str(poly.as_expr()),
        "coefficients": [int(c) for c in poly.all_coeffs()],
        "provenance": _provenance(config, "classpoly"),
    }


async def cmd_modpoly(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    phi = modular_polynomial(args.level, cache=cache)
    return {
        "kind": "modpoly",
        "level": args.level,
        "degree": psi(args.level),
        "terms": sorted(list(t) for t in phi.terms()),
        "provenance": _provenance(config, "modpoly"),
    }


async def cmd_heegner(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    curve = _parse_curve(args)
    pm = build_param_map(curve, config.prec, cache)
    result = heegner_point(pm, args.disc)
    trace = result.trace_rational
    return {
        "kind": "heegner",
        "disc": result.disc,
        "level": result.level,
        "conjugates": [
            {
                "form": str(c.tau.form),
                "z": c.z,
                "x_poly": str(c.x_poly.as_expr()) if c.x_poly is not None else None,
                "rational": str(c.rational) if c.rational is not None else None,
            }
            for c in result.conjugates
        ],
        "trace_z": result.trace_z,
        "trace": str(trace) if trace is not None else None,
        "trace_order": point_order(curve, trace) if trace is not None else None,
        "provenance": _provenance(
            config, "heegner", curve=str(curve), lam=str(pm.lam)
        ),
    }


async def cmd_param_eval(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    curve = _parse_curve(args)
    pm = build_param_map(curve, config.prec, cache)
    value = phi_eval(pm, parse_tau(args.tau, config.prec))
    return {
        "kind": "param-eval",
        "tau": args.tau,
        "z": value.z,
        "point": _complex_point(value.point),
        "torsion_order": torsion_order_of(pm, value.z),
        "provenance": _provenance(
            config, "param-eval", curve=str(curve), lam=str(pm.lam)
        ),
    }


async def cmd_relations(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    curve = _parse_curve(args)
    points = _parse_points(args.points)
    cap = args.coeff_cap if args.coeff_cap is not None else DEFAULT_COEFF_CAP
    rl = relation_lattice(curve, points, prec=config.prec, coeff_cap=cap)
    coset = smallest_torsion_coset(rl, points)
    return {
        "kind": "relations",
        "points": [str(p) for p in points],
        "cm": rl.cm,
        "basis": rl.basis,
        "basis_mod_torsion": rl.basis_mod_torsion,
        "rank": rl.rank,
        "torsion": [str(t) if t is not None else None for t in rl.torsion],
        "coset": {
            "dim": coset.dim,
            "translate_order": coset.translate_order,
            "proper": coset.proper,
        },
        "provenance": _provenance(
            config,
            "relations",
            curve=str(curve),
            coefficient_bound=rl.coefficient_bound,
            completeness=rl.completeness_label,
            work_prec=rl.prec,
            q=rl.q,
            eta=str(rl.eta),
        ),
    }


def _correspondence(
    config: RunConfig, curve: CurveQ, cache: CacheStore
) -> CorrespondenceSpec:
    pm = build_param_map(curve, config.scan.prec, cache)
    return CorrespondenceSpec(pm, config.scan.degree)


async def cmd_scan(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    cs = _correspondence(config, _parse_curve(args), cache)
    report = await scan_tuples_async(cs, config.scan, cache=cache)
    data = report.to_dict()
    data["coefficient_growth"] = coefficient_growth(report)
    return data


async def cmd_census_u(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    cs = _correspondence(config, _parse_curve(args), cache)
    parts = [part for part in args.u.split(";") if part.strip()]
    u_points = [parse_tau(part, config.scan.prec) for part in parts]
    if any(isinstance(u, (str, Fraction)) for u in u_points):
        raise InvalidInputError("U points must lie in the upper half plane")
    report = await u_special_scan_async(cs, u_points, config.scan.depth, config.scan)
    return report.to_dict()


async def cmd_gamma(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    curve = _parse_curve(args)
    cs = _correspondence(config, curve, cache)
    generators = _parse_points(args.generators)
    result = await gamma_sigma_intersection_async(cs, generators, config.scan)
    return result.to_dict()


async def cmd_sweep(
    args: argparse.Namespace, config: RunConfig, cache: CacheStore
) -> Dict[str, Any]:
    table = class_number_sweep(
        args.delta, check_degree=not args.skip_degree, cache=cache
    )
    data = table.to_dict()
    data["provenance"] = _provenance(config, "sweep", delta_bound=args.delta)
    return data


COMMANDS: Dict[str, Command] = {
    "classpoly": cmd_classpoly,
    "modpoly": cmd_modpoly,
    "heegner": cmd_heegner,
    "param-eval": cmd_param_eval,
    "relations": cmd_relations,
    "scan": cmd_scan,
    "census-u": cmd_census_u,
    "gamma": cmd_gamma,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="YAML configuration file")
    common.add_argument("--prec", type=int, help="working precision in bits")
    common.add_argument("--cache-dir", type=str, help="cache directory")
    common.add_argument("--format", choices=("json", "csv"), help="report format")
    common.add_argument("--log-level", type=str, help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--conductor", type=int, help="curve conductor, if known")
    common.add_argument("--n", type=int, help="tuple size for scans")
    common.add_argument("--degree", type=int, help="Hecke degree of the correspondence")
    common.add_argument("--delta-max", type=int, help="complexity bound |disc| <= D")
    common.add_argument("--isog-bound", type=int, help="largest isogeny degree")
    common.add_argument("--coeff-cap", type=int, help="relation coefficient cap")
    common.add_argument("--samples", type=int, help="samples per family test")
    common.add_argument("--depth", type=int, help="Hecke orbit depth for census-u")
    common.add_argument("--workers", type=int, help="worker processes (0 = inline)")
    common.add_argument("--seed", type=int, help="sampling seed")
    common.add_argument("--output", type=str, help="write the report to this file")

    parser = argparse.ArgumentParser(
        prog="cmgraphs",
        description="Special points, modular parametrizations and special graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classpoly", parents=[common], help="Hilbert class polynomial")
    p.add_argument("disc", type=int)
    p = sub.add_parser("modpoly", parents=[common], help="classical modular polynomial")
    p.add_argument("level", type=int)
    p = sub.add_parser("heegner", parents=[common], help="Heegner point")
    p.add_argument("curve")
    p.add_argument("disc", type=int)
    p = sub.add_parser("param-eval", parents=[common], help="evaluate phi(tau)")
    p.add_argument("curve")
    p.add_argument("tau")
    p = sub.add_parser("relations", parents=[common], help="relation lattice of points")
    p.add_argument("curve")
    p.add_argument("points", help='points separated by ";", e.g. "(0,0);(1,0)"')
    p = sub.add_parser("scan", parents=[common], help="census of Heegner tuples")
    p.add_argument("curve")
    p = sub.add_parser("census-u", parents=[common], help="census of Hecke orbits of U")
    p.add_argument("curve")
    p.add_argument("u", help='points of U separated by ";"')
    p = sub.add_parser("gamma", parents=[common], help="Gamma intersected with Sigma")
    p.add_argument("curve")
    p.add_argument("generators", help='generators separated by ";" (may be empty)')
    p = sub.add_parser("sweep", parents=[common], help="class number and height tables")
    p.add_argument("delta", type=int)
    p.add_argument("--skip-degree", action="store_true", help="skip deg H_D == h(D)")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "prec": args.prec,
        "cache_dir": args.cache_dir,
        "output_format": args.format,
        "log_level": args.log_level,
        "n": args.n,
        "degree": args.degree,
        "delta_max": args.delta_max,
        "isog_bound": args.isog_bound,
        "coeff_cap": args.coeff_cap,
        "samples": args.samples,
        "depth": args.depth,
        "workers": args.workers,
        "seed": args.seed,
    }


async def main(
    argv: Optional[Sequence[str]] = None, output: Optional[Output] = None
) -> int:
    """引数を解析してサブコマンドを実行し、終了コードを返します。"""
    args = build_parser().parse_args(argv)
    init_logging(args.log_level or "WARNING")
    try:
        config = ConfigLoader().build(
            Path(args.config) if args.config else None, _overrides(args)
        )
    except (ValidationError, FileNotFoundError, KeyError, yaml.YAMLError) as exc:
        logger.error("invalid configuration: %s", exc)
        return InvalidInputError.exit_code
    init_logging(config.log_level)
    cache = CacheStore(config.cache_dir)
    try:
        await cache.start()
        try:
            report = await COMMANDS[args.command](args, config, cache)
        finally:
            await cache.close()
    except CmGraphsError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("invalid input: %s", exc)
        return InvalidInputError.exit_code
    except Exception:
        logger.exception("internal error")
        return 4
    options: Dict[str, Any] = {"format": config.output_format}
    if output is None and args.output:
        output = FileOutput()
        options["path"] = args.output
    try:
        await (output or ConsoleOutput()).send(report, options)
    except OSError as exc:
        logger.error("cannot write report: %s", exc)
        return InvalidInputError.exit_code
    return 0


def main_sync() -> None:
    """同期エントリーポイント。"""
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    main_sync()
