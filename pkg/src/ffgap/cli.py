"""Command-line front end for batch gap certification runs.

Heavy numerical imports happen inside main() after argument parsing so that
--threads can cap BLAS worker pools before numpy initializes them.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass

SCHEMA_VERSION = 1
MAX_ED_DIM = 1 << 15
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run; embedded into every report."""

    command: str
    model: str | None = None
    sizes: tuple[int, ...] | None = None
    n: int | None = None
    m: int | None = None
    m2: int | None = None
    R: int | None = None
    mode: str | None = None
    bc: str | None = None
    seed: int | None = None
    trials: int | None = None
    suite: str | None = None
    zero_tol: float | None = None
    threads: int | None = None
    output: str | None = None
    format: str = "json"
    no_timestamp: bool = False

    def to_json(self) -> dict:
        doc = {k: v for k, v in asdict(self).items() if v is not None}
        if self.sizes is not None:
            doc["sizes"] = list(self.sizes)
        return doc


def parse_sizes(text: str) -> tuple[int, ...]:
    """Parse '6', '4..9', or '4,6,8' into a tuple of sizes."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(part) for part in text.split(","))


def _float_12g(x) -> str:
    return f"{x:.12g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffgap",
        description="Finite-size gap certification for frustration-free models.",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    parser.add_argument("--output", default=None, help="write the report to this path")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    parser.add_argument(
        "--error-json", action="store_true", help="emit machine-readable JSON on errors"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model(p, required=True):
        p.add_argument(
            "--model",
            required=required,
            help="builtin (aklt, singlet, commuting2d, random:d=..,rank_bulk=..,"
            "rank_boundary=..,seed=..) or a model JSON path",
        )

    p = sub.add_parser("gap", help="exact gaps of a chain model over a size range")
    add_model(p)
    p.add_argument("--sizes", required=True, help="size range, e.g. 4..10 or 4,6,8")
    p.add_argument("--bc", choices=("open", "periodic"), default="open")
    p.add_argument("--zero-tol", type=float, default=1e-10)

    p = sub.add_parser("profile", help="bulk and edge gap profile of a chain model")
    add_model(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--zero-tol", type=float, default=1e-10)

    p = sub.add_parser("certify", help="evaluate a finite-size criterion")
    csub = p.add_subparsers(dest="criterion", required=True)
    for name in ("thm1", "thm2"):
        cp = csub.add_parser(name)
        add_model(cp)
        cp.add_argument("--n", type=int, required=True)
        cp.add_argument("--mode", choices=("exact", "asymptotic"), default="exact")
    cp = csub.add_parser("gm")
    add_model(cp)
    cp.add_argument("--n", type=int, required=True)
    cp.add_argument("--m", type=int, required=True)
    cp = csub.add_parser("quasi1d")
    add_model(cp)
    cp.add_argument("--n", type=int, required=True)
    cp.add_argument("--m2", type=int, required=True)
    cp.add_argument("--R", type=int, required=True)
    cp = csub.add_parser("2d")
    add_model(cp)
    cp.add_argument("--n", type=int, required=True)
    cp.add_argument("--R", type=int, required=True)

    p = sub.add_parser("thresholds", help="tabulate criterion thresholds over n")
    p.add_argument("--n", required=True, help="range of n, e.g. 4..9")
    p.add_argument("--mode", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("verify", help="run the operator-inequality suite")
    p.add_argument("--suite", choices=("1d", "1d+2d"), default="1d")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)

    p = sub.add_parser("coarse-grain", help="summarize an effective metaspin model")
    add_model(p)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--m2", type=int, default=None, help="strip height (quasi-1D mode)")
    p.add_argument(
        "--two-d", action="store_true", help="build the 2D plaquette model instead"
    )

    return parser


def resolve_model(name: str, ff_check_depth: int = 8):
    """Builtin name, random:<kwargs> recipe, or model-file path -> ModelSpec."""
    from . import models

    if name == "aklt":
        return models.aklt(ff_check_depth)
    if name in ("singlet", "singlet_chain"):
        return models.singlet_chain(ff_check_depth)
    if name == "commuting2d":
        return models.commuting_cell_2d()
    if name.startswith("random:"):
        kwargs = {}
        for part in name[len("random:"):].split(","):
            key, value = part.split("=", 1)
            kwargs[key.strip()] = int(value)
        return models.random_ff(
            kwargs["d"],
            kwargs.get("rank_bulk", 1),
            kwargs.get("rank_boundary", 0),
            kwargs.get("seed", 0),
            ff_check_depth=ff_check_depth,
        )
    return models.load(name, ff_check_depth=ff_check_depth)


def _require_kind(spec, kind: str):
    if spec.kind != kind:
        raise ValueError(f"model {spec.name!r} has kind {spec.kind!r}, need {kind!r}")
    return spec.payload


def _guarded_gap(hamiltonian, zero_tol: float = 1e-10):
    from .spectra import spectral_gap

    if hamiltonian.dim > MAX_ED_DIM:
        raise ValueError(
            f"window dimension {hamiltonian.dim} exceeds the diagonalization cap {MAX_ED_DIM}"
        )
    return spectral_gap(hamiltonian, zero_tol=zero_tol)


# ---------------------------------------------------------------------------
# subcommand bodies (return (result_object, exit_code))
# ---------------------------------------------------------------------------

def _cmd_gap(args):
    from .operators import chain_hamiltonian
    from dataclasses import replace

    spec = resolve_model(args.model)
    model = _require_kind(spec, "chain")
    if args.bc == "periodic":
        model = replace(model, bc="periodic")
    reports = []
    for m in parse_sizes(args.sizes):
        rep = _guarded_gap(chain_hamiltonian(model, m), args.zero_tol)
        reports.append({"m": m, **asdict(rep)})
    return {"model": spec.name, "bc": args.bc, "gaps": reports}, EXIT_OK


def _cmd_profile(args):
    from .spectra import gap_profile

    spec = resolve_model(args.model)
    model = _require_kind(spec, "chain")
    profile = gap_profile(model, args.n, zero_tol=args.zero_tol)
    return {
        "model": spec.name,
        "n": profile.n,
        "bulk": list(profile.bulk_list),
        "left": list(profile.left),
        "right": list(profile.right),
        "edge_min": profile.edge_min,
        "boundary_trivial": profile.boundary_trivial,
    }, EXIT_OK


def _cmd_certify(args):
    from . import criteria
    from .coarse_grain import effective_1d, effective_2d
    from .lattice import box_region, rhomboid_sites
    from .operators import ChainModel, LocalProjector, chain_hamiltonian, region_hamiltonian
    from .spectra import gap_profile

    if args.criterion in ("thm1", "thm2"):
        spec = resolve_model(args.model)
        model = _require_kind(spec, "chain")
        profile = gap_profile(model, args.n)
        if args.criterion == "thm1":
            cert = criteria.certify_thm1(profile, args.n, mode=args.mode)
        else:
            cert = criteria.certify_thm2(model, profile, args.n, mode=args.mode)
    elif args.criterion == "gm":
        spec = resolve_model(args.model)
        model = _require_kind(spec, "chain")
        zero = LocalProjector.zero(1, model.d)
        bulk_model = ChainModel(model.d, model.P, zero, zero)
        rep = _guarded_gap(chain_hamiltonian(bulk_model, args.n))
        cert = criteria.certify_periodic(rep.gap, args.n, args.m)
    elif args.criterion == "quasi1d":
        spec = resolve_model(args.model)
        cell = _require_kind(spec, "cell_2d")
        eff = effective_1d(cell, args.m2, args.R)
        gaps = {}
        for l in range(args.n // 2, args.n + 1):
            region = box_region(l * eff.R, args.m2)
            gaps[l] = _guarded_gap(region_hamiltonian(cell, region)).gap
        cert = criteria.certify_quasi1d(cell, args.m2, args.R, args.n, gaps, effective=eff)
    elif args.criterion == "2d":
        spec = resolve_model(args.model)
        cell = _require_kind(spec, "cell_2d")
        eff = effective_2d(cell, args.R)
        gaps = {}
        window = range(args.n // 2, args.n + 1)
        for l1 in window:
            for l2 in window:
                sites, _ = rhomboid_sites(l1, l2, args.R)
                gaps[(l1, l2)] = _guarded_gap(region_hamiltonian(cell, sites)).gap
        cert = criteria.certify_2d(cell, args.R, args.n, gaps, effective=eff)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown criterion {args.criterion!r}")
    code = EXIT_OK if cert.verdict == "certified_gapped" else EXIT_INCONCLUSIVE
    doc = cert.to_json()
    doc["model"] = spec.name
    return doc, code


def _threshold_rows(ns, mode: str):
    from .coefficients import SQRT6, optimal_x, prefactor_1d, threshold_1d, threshold_2d

    rows = []
    for n in ns:
        x = optimal_x(n)[0] if mode == "exact" and n >= 4 else SQRT6
        row = {
            "n": n,
            "G_exact_1d": threshold_1d(n, "exact") if n >= 4 else None,
            "G_asymptotic_1d": threshold_1d(n, "asymptotic") if n >= 3 else None,
            "F_lower": prefactor_1d(n, x)[1] if n >= 4 else None,
            "G_2d": threshold_2d(n) if n >= 2 and n % 2 == 0 else None,
        }
        row["G_2d_times_n32"] = row["G_2d"] * n ** 1.5 if row["G_2d"] is not None else None
        rows.append(row)
    return rows


def _cmd_thresholds(args):
    ns = parse_sizes(args.n)
    rows = _threshold_rows(ns, args.mode)
    if args.format == "json":
        return {"mode": args.mode, "rows": rows}, EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["n", "G_exact_1d", "G_asymptotic_1d", "F_lower", "G_2d", "G_2d_times_n32"]
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [row["n"]]
            + ["" if row[k] is None else _float_12g(row[k]) for k in header[1:]]
        )
    return buf.getvalue(), EXIT_OK


def _cmd_verify(args):
    from .criteria import verify_inequality_suite

    report = verify_inequality_suite(
        args.seed, args.trials, include_2d=(args.suite == "1d+2d")
    )
    return report, EXIT_OK if report["pass"] else EXIT_ERROR


def _cmd_coarse_grain(args):
    from .coarse_grain import effective_1d, effective_2d

    spec = resolve_model(args.model)
    cell = _require_kind(spec, "cell_2d")
    if args.two_d:
        eff = effective_2d(cell, args.R)
        doc = {
            "geometry": "2d",
            "metaspin_dim": eff.metaspin_dim,
            "lambda_min": eff.lambda_min,
            "lambda_max": eff.lambda_max,
            "C1": eff.C1,
            "C2": eff.C2,
            "R": eff.R,
        }
    else:
        if args.m2 is None:
            raise ValueError("quasi-1D coarse-graining needs --m2 (or pass --two-d)")
        eff = effective_1d(cell, args.m2, args.R)
        doc = {
            "geometry": "quasi1d",
            "metaspin_dim": eff.metaspin_dim,
            "lambda_min": eff.lambda_min,
            "lambda_max": eff.lambda_max,
            "C1": eff.C1,
            "C2": eff.C2,
            "R": eff.R,
            "m2": eff.m2,
        }
    doc["model"] = spec.name
    return doc, EXIT_OK


# ---------------------------------------------------------------------------
# report envelope and entry point
# ---------------------------------------------------------------------------

def _run_config(args) -> RunConfig:
    getv = lambda key: getattr(args, key, None)
    command = args.command
    if command == "certify":
        command = f"certify-{args.criterion}"
    sizes = getv("sizes")
    if isinstance(sizes, str):
        sizes = parse_sizes(sizes)
    n = getv("n")
    if isinstance(n, str):
        n = None  # thresholds uses a range; recorded via sizes below
        sizes = parse_sizes(args.n)
    return RunConfig(
        command=command,
        model=getv("model"),
        sizes=sizes,
        n=n,
        m=getv("m"),
        m2=getv("m2"),
        R=getv("R"),
        mode=getv("mode"),
        bc=getv("bc"),
        seed=getv("seed"),
        trials=getv("trials"),
        suite=getv("suite"),
        zero_tol=getv("zero_tol"),
        threads=getv("threads"),
        output=getv("output"),
        format=getv("format") or "json",
        no_timestamp=bool(getv("no_timestamp")),
    )


def _emit(result, config: RunConfig, args) -> None:
    if isinstance(result, str):  # preformatted CSV
        text = result
    else:
        import numpy
        import scipy

        from . import __version__

        envelope = {
            "schema_version": SCHEMA_VERSION,
            "tool": {
                "name": "ffgap",
                "version": __version__,
                "numpy": numpy.__version__,
                "scipy": scipy.__version__,
            },
            "config": config.to_json(),
            "result": result,
        }
        if not args.no_timestamp:
            import datetime

            envelope["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        text = json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_COMMANDS = {
    "gap": _cmd_gap,
    "profile": _cmd_profile,
    "certify": _cmd_certify,
    "thresholds": _cmd_thresholds,
    "verify": _cmd_verify,
    "coarse-grain": _cmd_coarse_grain,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(args.threads))
    try:
        result, code = _COMMANDS[args.command](args)
        _emit(result, _run_config(args), args)
        return code
    except (ValueError, OSError, RuntimeError, KeyError) as err:
        if args.error_json:
            sys.stdout.write(
                json.dumps({"error": str(err), "type": type(err).__name__}) + "\n"
            )
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
