"""Command-line front end.

Subcommands: ``fig1`` / ``fig2`` / ``fig3`` run the preset sweeps and write a
CSV plus a manifest; ``bounds`` prints the closed-form quantities for a
parameter set; ``custom`` runs a sweep described by an INI config file.  SNR
is accepted in dB on every interface and stored linear internally.  The
FDD_MIMO_THREADS environment variable caps the worker count (0 or unset
means auto).
"""

import argparse
import configparser
import json
import math
import os
import sys

from . import __version__
from .bounds import (
    ScalingParams,
    balancing_ratio,
    bf_beats_zf,
    delta_dp,
    gamma,
    rate_floor_fast_nt,
    rate_floor_log_nt,
)
from .channel import BF, DP, SCHEMES, ZF, SystemConfig
from .experiments import (
    DEFAULT_TRIALS,
    ExperimentSpec,
    run_experiment,
    run_fig1,
    run_fig2,
    run_fig3,
)
from .results import build_manifest, write_csv, write_manifest


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip() != ""]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip() != ""]


def _add_common(parser, default_snr_db=30.0):
    parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--snr-db", type=float, default=default_snr_db)
    parser.add_argument("--out-dir", default="results")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdd-mimo",
        description="Monte Carlo simulator and closed-form bounds for FDD massive-MIMO rate balancing",
    )
    parser.add_argument("--version", action="version", version=f"fdd-mimo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("fig1", help="average user rate vs feedback bits (BF/ZF/DP)")
    _add_common(p1)
    p1.add_argument("--b-list", type=_float_list, default=None, help="comma-separated bit budgets")

    for name, helptext in (
        ("fig2", "per-user spectral efficiency vs antennas (BF, three policies)"),
        ("fig3", "sum rate vs antennas (BF/ZF/DP, three policies)"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--n-list", type=_int_list, default=None, help="comma-separated antenna counts")
        p.add_argument("--cu", type=float, default=4.0, help="users per log2(N)")
        p.add_argument("--cf-t", type=float, default=10.0, help="feedback fraction times block length")
        p.add_argument("--coherence-block", type=int, default=180)
        p.add_argument(
            "--uplink-budget",
            choices=("instantaneous", "average"),
            default="instantaneous",
            help="per-trial uplink rate or 100-realization average sets the budget",
        )

    pb = sub.add_parser("bounds", help="print the closed-form balancing and scaling quantities")
    pb.add_argument("--coherence-block", "--T", dest="coherence_block", type=int, default=None)
    pb.add_argument("--nt", type=int, default=None, help="transmit antennas")
    pb.add_argument("--cu", type=float, default=None)
    pb.add_argument("--ct", type=float, default=None)
    pb.add_argument("--cf", type=float, default=None, help="feedback fraction of the uplink rate")
    pb.add_argument("--cf-t", type=float, default=None, help="c_f * T directly")
    pb.add_argument("--snr-db", type=float, default=30.0)
    pb.add_argument("--scheme", choices=(BF, ZF, DP), default=None, help="restrict output to one scheme")
    pb.add_argument("--per-block", action="store_true", help="also print floors in bits per block")
    pb.add_argument("--json", action="store_true")

    pc = sub.add_parser("custom", help="run a sweep described by an INI config file")
    pc.add_argument("config", help="path to the INI experiment description")
    pc.add_argument("--out-dir", default="results")
    return parser


def _emit(out_dir, name, rows, skipped, specs, seed) -> int:
    csv_path = os.path.join(out_dir, f"{name}.csv")
    manifest_path = os.path.join(out_dir, f"{name}.manifest.json")
    write_csv(csv_path, name, rows)
    manifest = build_manifest(__version__, name, seed, specs, [csv_path], skipped)
    write_manifest(manifest_path, manifest)
    for skip in skipped:
        print(
            f"warning: skipped point={skip.point:g} scheme={skip.scheme}"
            f"{' policy=' + skip.policy_label if skip.policy_label else ''}: {skip.reason}",
            file=sys.stderr,
        )
    print(f"wrote {csv_path} ({len(rows)} rows) and {manifest_path}")
    return 0


def _cmd_fig(args) -> int:
    if args.command == "fig1":
        rows, skipped, specs = run_fig1(
            trials=args.trials, seed=args.seed, snr_db=args.snr_db, bits_grid=args.b_list
        )
    else:
        runner = run_fig2 if args.command == "fig2" else run_fig3
        rows, skipped, specs = runner(
            trials=args.trials,
            seed=args.seed,
            snr_db=args.snr_db,
            n_grid=args.n_list,
            c_u=args.cu,
            cf_t=args.cf_t,
            coherence_block=args.coherence_block,
            uplink_budget=args.uplink_budget,
        )
    return _emit(args.out_dir, args.command, rows, skipped, specs, args.seed)


def _bounds_table(args) -> dict:
    out: dict = {}
    snr = 10.0 ** (args.snr_db / 10.0)
    out["snr_db"] = args.snr_db
    if args.coherence_block is not None and args.nt is not None:
        out["balancing_ratio"] = balancing_ratio(args.coherence_block, args.nt)
    cf_t = args.cf_t
    block = args.coherence_block
    if cf_t is None and args.cf is not None and block is not None:
        cf_t = args.cf * block
    if cf_t is None:
        return out
    if block is None:
        block = 1  # only the product c_f * T enters the floors
    c_f = cf_t / block
    out["cf_t"] = cf_t
    if args.cu is not None:
        params = ScalingParams(c_u=args.cu, c_f=c_f, coherence_block=block, snr=snr)
        out["rate_floor_fast_nt"] = rate_floor_fast_nt(params)
    if args.ct is not None:
        out["gamma"] = gamma(snr, c_f, block, args.ct)
    if args.cu is not None and args.ct is not None:
        schemes = (args.scheme,) if args.scheme else (BF, ZF, DP)
        for scheme in schemes:
            try:
                params = ScalingParams(
                    c_u=args.cu, c_f=c_f, coherence_block=block, snr=snr,
                    scheme=scheme, c_t=args.ct,
                )
            except ValueError as exc:
                out[f"rate_floor_log_nt[{scheme}]"] = f"invalid: {exc}"
                continue
            out[f"rate_floor_log_nt[{scheme}]"] = rate_floor_log_nt(params)
            if scheme == DP:
                out["delta_dp"] = delta_dp(params)
        base = ScalingParams(
            c_u=args.cu, c_f=c_f, coherence_block=block, snr=snr, scheme=BF, c_t=args.ct
        )
        out["bf_beats_zf"] = bf_beats_zf(base)
    if args.per_block and args.coherence_block is not None:
        for key in list(out):
            if key.startswith("rate_floor"):
                value = out[key]
                if isinstance(value, float):
                    out[key + "_bits_per_block"] = value * args.coherence_block
    return out


def _cmd_bounds(args) -> int:
    table = _bounds_table(args)
    if args.json:
        print(json.dumps(table, indent=2, sort_keys=True))
        return 0
    width = max(len(k) for k in table) if table else 0
    for key, value in table.items():
        if isinstance(value, float):
            print(f"{key:<{width}}  {value:.6g}")
        else:
            print(f"{key:<{width}}  {value}")
    return 0


class ConfigError(ValueError):
    pass


def _require(section, key, cast, context):
    if key not in section:
        raise ConfigError(f"missing key '{key}' in section [{context}]")
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}' in section [{context}]: {exc}") from exc


def _optional(section, key, cast, default, context):
    if key not in section:
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for '{key}' in section [{context}]: {exc}") from exc


def load_custom_spec(path: str) -> ExperimentSpec:
    """Parse the INI experiment dialect (documented in the README)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    if "experiment" not in parser:
        raise ConfigError("missing section [experiment]")
    if "system" not in parser:
        raise ConfigError("missing section [system]")
    exp = parser["experiment"]
    system = parser["system"]

    name = _optional(exp, "name", str, "custom", "experiment")
    trials = _require(exp, "trials", int, "experiment")
    seed = _require(exp, "seed", int, "experiment")
    schemes = tuple(
        s.strip().lower() for s in _require(exp, "schemes", str, "experiment").split(",")
    )
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme '{scheme}' in section [experiment]")

    snr_db = _require(system, "snr_db", float, "system")
    feedback_bits = _optional(system, "feedback_bits", float, None, "system")
    feedback_fraction = _optional(system, "feedback_fraction", float, None, "system")
    if (feedback_bits is None) == (feedback_fraction is None):
        raise ConfigError(
            "section [system] must set exactly one of feedback_bits / feedback_fraction"
        )
    # the base carries a scheme-neutral configuration; scheme-specific
    # invariants are re-checked per (point, scheme), so an invalid combination
    # becomes a skipped point rather than a parse failure
    zf_order = _optional(system, "zf_order", int, None, "system")
    try:
        base = SystemConfig(
            n_rx=_require(system, "n_rx", int, "system"),
            n_tx=_require(system, "n_tx", int, "system"),
            n_users=_require(system, "n_users", int, "system"),
            snr=10.0 ** (snr_db / 10.0),
            coherence_block=_optional(system, "coherence_block", int, 180, "system"),
            feedback_bits_per_block=feedback_bits,
            feedback_fraction=feedback_fraction,
            scheme="partial_zf" if zf_order is not None else "bf",
            zf_order=zf_order,
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid [system] configuration: {exc}") from exc

    if "sweep" not in parser:
        spec_kind, values = "points", ({},)
        policy_args = {}
    else:
        sweep = parser["sweep"]
        spec_kind = _require(sweep, "kind", str, "sweep").strip().lower()
        if spec_kind == "feedback_bits":
            values = tuple(_require(sweep, "values", _float_list, "sweep"))
            policy_args = {}
        elif spec_kind == "antennas":
            values = tuple(_require(sweep, "values", _int_list, "sweep"))
            policy_args = {
                "antenna_policy": _optional(sweep, "antenna_policy", str, "all", "sweep"),
                "user_policy": _optional(sweep, "user_policy", str, "fixed", "sweep"),
                "feedback_policy": _optional(
                    sweep, "feedback_policy", str,
                    "uplink_fraction" if feedback_fraction is not None else "fixed_bits",
                    "sweep",
                ),
                "c_u": _optional(sweep, "c_u", float, None, "sweep"),
                "c_t": _optional(sweep, "c_t", float, None, "sweep"),
                "uplink_budget": _optional(
                    sweep, "uplink_budget", str, "instantaneous", "sweep"
                ),
            }
        elif spec_kind == "points":
            values = ({},)
            policy_args = {}
        else:
            raise ConfigError(f"unknown sweep kind '{spec_kind}' in section [sweep]")

    try:
        return ExperimentSpec(
            name=name,
            base=base,
            sweep_kind=spec_kind,
            sweep_values=values,
            schemes=schemes,
            trials=trials,
            **policy_args,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_custom(args) -> int:
    spec = load_custom_spec(args.config)
    rows, skipped = run_experiment(spec)
    return _emit(args.out_dir, spec.name, rows, skipped, [spec], spec.base.seed)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("fig1", "fig2", "fig3"):
            return _cmd_fig(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        return _cmd_custom(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
