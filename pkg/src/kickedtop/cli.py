"""Command-line surface: one subcommand per pipeline stage plus figure presets.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .config import ExperimentConfig, parse_interval_list
from .errors import ConfigError, NumericalError
from . import orchestrator as orch

logger = logging.getLogger(__name__)

COMMANDS = (
    "poincare",
    "lyapunov-map",
    "ks-scan",
    "spectrum",
    "rstat-scan",
    "husimi",
    "overlap",
    "pm-hist",
    "fmix",
    "zeta-scan",
    "reproduce-fig1",
    "reproduce-fig2",
    "reproduce-fig3",
    "reproduce-fig4",
    "reproduce-fig5",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse default exits with code 2
        raise ConfigError(message)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in filter(None, (c.strip() for c in text.split(","))))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in filter(None, (c.strip() for c in text.split(","))))


def _grid(text: str) -> tuple[int, int]:
    a, _, b = text.lower().partition("x")
    if not b:
        raise ValueError("grid must look like 300x300")
    return int(a), int(b)


def _offsets(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    return int(lo), int(hi)


def build_parser() -> _Parser:
    p = _Parser(prog="kicked-top", description=__doc__)
    p.add_argument("--log-level", default="INFO")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--config", help="path to a key = value config file")
        c.add_argument("--out-dir")
        c.add_argument("--seed", type=int)
        c.add_argument("--workers", type=int)
        c.add_argument("--gamma", type=_float_list, help="comma list, e.g. 0.2,2,4,6")
        c.add_argument("--j", type=_int_list, help="comma list of j (ensemble centers)")
        c.add_argument("--alpha", type=float)
        c.add_argument("--grid", type=_grid, help="phase-space resolution, e.g. 300x300")
        c.add_argument("--geometry", choices=("angle", "area"))
        c.add_argument("--kicks", type=int, help="kicks per Lyapunov orbit")
        c.add_argument("--lambda-cut", type=float)
        c.add_argument("--j-offsets", type=_offsets, help="ensemble range lo:hi around each j")
        c.add_argument("--j-step", type=int)
        c.add_argument("--intervals", type=parse_interval_list, help="e.g. -0.8:0.7,-0.2:0.2")
        c.add_argument("--window", type=float, help="zeta-scan window width")
        c.add_argument("--step", type=float, help="zeta-scan window step")
        c.add_argument("--bins", type=int, help="P(M) histogram bins")
        c.add_argument("--inits", type=int, help="Poincare initial conditions")
        c.add_argument("--poincare-kicks", type=int)
        c.add_argument("--states", type=_int_list, help="eigenstate indices for husimi")
        c.add_argument("--targets", type=_float_list, help="husimi states picked by closest M")
        c.add_argument("--save-vectors", action="store_true", default=None)
        c.add_argument("--no-wrap", action="store_true", default=None,
                       help="drop the circular wrap-around spacing")
        c.add_argument("--full-spectrum-r", action="store_true", default=None,
                       help="r statistics on the full spectrum, parity sectors mixed")
        c.add_argument("--r-coe", type=float)
    return p


_FLAG_TO_FIELD = {
    "out_dir": "out_dir",
    "seed": "seed",
    "workers": "workers",
    "gamma": "gamma",
    "j": "j",
    "alpha": "alpha",
    "geometry": "grid_geometry",
    "kicks": "n_kicks",
    "lambda_cut": "lambda_cut",
    "j_step": "j_step",
    "intervals": "m_intervals",
    "window": "zeta_window",
    "step": "zeta_step",
    "bins": "pm_bins",
    "inits": "poincare_inits",
    "poincare_kicks": "poincare_kicks",
    "states": "husimi_states",
    "targets": "husimi_targets",
    "save_vectors": "save_vectors",
    "r_coe": "r_coe",
}


def config_from_args(args: argparse.Namespace) -> tuple[ExperimentConfig, set[str]]:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for flag, field_name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field_name] = value
    if getattr(args, "grid", None) is not None:
        overrides["n_phi"], overrides["n_theta"] = args.grid
    if getattr(args, "j_offsets", None) is not None:
        overrides["j_offset_lo"], overrides["j_offset_hi"] = args.j_offsets
    if getattr(args, "no_wrap", None):
        overrides["include_wrap"] = False
    if getattr(args, "full_spectrum_r", None):
        overrides["split_parity"] = False
    user_set = set(overrides)
    valid = {f.name for f in fields(ExperimentConfig)}
    assert user_set <= valid
    return cfg.with_overrides(**overrides), user_set


_DISPATCH = {
    "poincare": orch.run_poincare,
    "lyapunov-map": orch.run_lyapunov,
    "ks-scan": orch.run_ks_scan,
    "spectrum": orch.run_spectrum,
    "rstat-scan": orch.run_rstat_scan,
    "husimi": orch.run_husimi,
    "overlap": orch.run_overlap,
    "pm-hist": orch.run_pm_hist,
    "fmix": orch.run_fmix,
    "zeta-scan": orch.run_zeta_scan,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=getattr(logging, args.log_level.upper(), logging.INFO),
            format="%(levelname)s %(name)s: %(message)s",
        )
        cfg, user_set = config_from_args(args)
        if args.command.startswith("reproduce-fig"):
            figure = int(args.command[-1])
            files = orch.reproduce_figure(figure, cfg, user_set)
        else:
            files = _DISPATCH[args.command](cfg)
        for f in files:
            print(f)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
