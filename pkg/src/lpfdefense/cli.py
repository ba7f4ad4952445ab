"""Command-line entry point: ``lpf {filter,dataset,analyze,preprocess,perturb,info}``.

Exit codes: 0 success, 2 partial failure, 64 usage error, 74 I/O error.
``LPF_SEED`` and ``LPF_THREADS`` supply defaults for ``--seed``/``--threads``.
"""
import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .analysis import DEFAULT_EPS, cloud_coefficients, dis_coef_from_coeffs, export_marginal, export_triangle, spectrum_delta
from .cloud import center
from .cloudio import CloudFormat, encode_cloud, format_for_path, load_cloud
from .dataset import (
    LPF1, LPF2, DefenseDatasetJob, build_manifest, digest, iter_dataset,
    make_defense_dataset, write_manifest,
)
from .errors import CloudIOError, EmptyCloud, LPFError, ParseError
from .lpf import DEFAULT_BANDLIMIT, DEFAULT_N_TARGET, DEFAULT_S, FilterSpec, lowpass_cloud, path_seed
from .preprocess import SOR_ALPHA, SOR_K, PerturbSpec, SorParams, perturb, sor, srs
from .projection import build_grid

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_USAGE = 64
EXIT_IO = 74
ANALYSIS_BANDLIMIT = 32


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _add_filter_args(p, n_default=DEFAULT_N_TARGET):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gaussian-s", type=float, help=f"Gaussian degree-weight width S (default {DEFAULT_S:g})")
    g.add_argument("--box-cutoff", type=int, help="keep degrees <= cutoff, drop the rest")
    p.add_argument("--lmax", type=int, default=DEFAULT_BANDLIMIT, help="bandlimit L (default %(default)s)")
    p.add_argument("--n", type=int, default=n_default,
                   help="points per output cloud; 0 keeps the input count (default %(default)s)")


def _add_run_args(p):
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="RNG seed (env LPF_SEED)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env LPF_THREADS)")


def _filter_spec(args, default_s=DEFAULT_S):
    if getattr(args, "box_cutoff", None) is not None:
        return FilterSpec.box(args.box_cutoff)
    s = args.gaussian_s if args.gaussian_s is not None else default_s
    return None if s is None else FilterSpec.gaussian(s)


def _n_target(n):
    if n < 0:
        raise UsageError(f"--n must be >= 0, got {n}")
    return None if n == 0 else n


def _seed_threads(args):
    seed = args.seed if args.seed is not None else _env_int("LPF_SEED", 0)
    threads = args.threads if args.threads is not None else _env_int("LPF_THREADS", 1)
    if threads < 1:
        raise UsageError(f"thread count must be >= 1, got {threads}")
    return seed, threads


def _fmt(name):
    try:
        return CloudFormat(name.lower())
    except ValueError:
        raise UsageError(f"unknown format {name!r}") from None


def _require_input(path):
    if not Path(path).exists():
        raise CloudIOError(f"input does not exist: {path}")


def _lowpass_job(args, mode):
    spec = _filter_spec(args)
    build_grid(args.lmax)
    seed, threads = _seed_threads(args)
    job = DefenseDatasetJob(
        input_root=args.inp, output_root=args.out, mode=mode, filter=spec, bandlimit=args.lmax,
        n_target=_n_target(args.n), seed=seed, out_format=_fmt(args.format),
    )
    return job, threads


def _run_dataset(job, threads, empty_is_usage):
    files = iter_dataset(job.input_root)
    if not files and empty_is_usage:
        raise UsageError(f"no point-cloud files under {job.input_root}")
    t0 = time.perf_counter()
    manifest = make_defense_dataset(job, threads=threads, files=files)
    wall = time.perf_counter() - t0
    print(f"processed {len(files)} clouds -> {len(manifest['outputs'])} outputs, "
          f"{len(manifest['failures'])} failures, {wall:.2f} s")
    for f in manifest["failures"]:
        print(f"  failed: {f['src']}: {f['error']}", file=sys.stderr)
    return EXIT_PARTIAL if manifest["failures"] else EXIT_OK


def cmd_filter(args):
    _require_input(args.inp)
    if Path(args.inp).is_dir():
        job, threads = _lowpass_job(args, LPF1)
        return _run_dataset(job, threads, empty_is_usage=True)
    spec = _filter_spec(args)
    build_grid(args.lmax)
    seed, _ = _seed_threads(args)
    n_target = _n_target(args.n)
    out_fmt = format_for_path(args.out)
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    params = {"input": args.inp, "output": args.out, "filter": spec.params(), "bandlimit": args.lmax,
              "n_target": n_target, "seed": seed, "format": out_fmt.value}
    cloud = load_cloud(args.inp)
    try:
        out = lowpass_cloud(cloud, spec, args.lmax, n_target, path_seed(seed, Path(args.inp).name))
    except LPFError as exc:
        manifest = build_manifest(params, [([], {"src": args.inp, "error": f"{type(exc).__name__}: {exc}"})])
        write_manifest(manifest, manifest_path)
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    data = encode_cloud(out, out_fmt)
    _write_bytes(args.out, data)
    entry = {"src": args.inp, "dst": args.out, "mode": "filter", "digest": digest(data), "n_points": len(out)}
    write_manifest(build_manifest(params, [([entry], None)]), manifest_path)
    print(f"{args.inp}: {len(cloud)} -> {len(out)} points")
    return EXIT_OK


def _write_bytes(path, data):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CloudIOError(f"cannot write {path}: {exc}") from exc


def cmd_dataset(args):
    _require_input(args.inp)
    job, threads = _lowpass_job(args, args.mode.upper())
    return _run_dataset(job, threads, empty_is_usage=True)


def cmd_analyze(args):
    _require_input(args.org)
    _require_input(args.adv)
    build_grid(args.lmax)
    if not args.eps > 0:
        raise UsageError("--eps must be positive")
    _, threads = _seed_threads(args)
    org = {rel for rel, _ in iter_dataset(args.org)}
    adv = {rel for rel, _ in iter_dataset(args.adv)}
    missing = sorted((org - adv) | (adv - org))
    pairs = sorted(org & adv)
    for rel in missing:
        side = "adv" if rel in org else "org"
        print(f"missing pair: {rel} (absent from {side} tree)", file=sys.stderr)
    if not pairs:
        raise UsageError("no matching cloud pairs")

    def coeffs(rel):
        return (cloud_coefficients(load_cloud(Path(args.org) / rel), args.lmax),
                cloud_coefficients(load_cloud(Path(args.adv) / rel), args.lmax))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(coeffs, pairs))
    else:
        results = [coeffs(rel) for rel in pairs]
    c_org = [a for a, _ in results]
    c_adv = [b for _, b in results]
    dmap = dis_coef_from_coeffs(c_org, c_adv, eps=args.eps)
    delta = np.mean([spectrum_delta(a, b) for a, b in results], axis=0)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CloudIOError(f"cannot create {out}: {exc}") from exc
    export_triangle(dmap, out / "dis_triangle.csv")
    export_marginal(out / "dis_marginal.csv", delta, dmap)
    print(f"{len(pairs)} pairs, L={args.lmax}: wrote {out / 'dis_triangle.csv'} and {out / 'dis_marginal.csv'}")
    return EXIT_PARTIAL if missing else EXIT_OK


def _map_clouds(inp, out, fn, out_fmt=None):
    """Apply ``fn(cloud, rel)`` to one file or every file of a tree."""
    _require_input(inp)
    if Path(inp).is_dir():
        files = iter_dataset(inp)
        if not files:
            raise UsageError(f"no point-cloud files under {inp}")
        jobs = [(Path(inp) / rel, Path(out) / rel, rel, label) for rel, label in files]
    else:
        jobs = [(Path(inp), Path(out), Path(inp).name, None)]
    failures = 0
    for src, dst, rel, label in jobs:
        try:
            cloud = load_cloud(src, label=label)
            result = fn(cloud, rel)
        except LPFError as exc:
            if isinstance(exc, CloudIOError):
                raise
            print(f"failed: {rel}: {exc}", file=sys.stderr)
            failures += 1
            continue
        fmt = out_fmt or format_for_path(dst)
        _write_bytes(dst, encode_cloud(result, fmt))
        print(f"{rel}: {len(cloud)} -> {len(result)} points")
    return EXIT_PARTIAL if failures else EXIT_OK


def cmd_preprocess(args):
    seed, _ = _seed_threads(args)
    use_sor = args.sor or args.sor_k is not None or args.sor_alpha is not None
    sor_params = None
    if use_sor:
        sor_params = SorParams(SOR_K if args.sor_k is None else args.sor_k,
                               SOR_ALPHA if args.sor_alpha is None else args.sor_alpha)
    if args.srs_drop is not None and args.srs_drop < 0:
        raise UsageError("--srs-drop must be >= 0")
    spec = _filter_spec(args, default_s=None)
    if spec is not None:
        build_grid(args.lmax)
    n_target = _n_target(args.n)
    if sor_params is None and args.srs_drop is None and spec is None:
        raise UsageError("nothing to do: give --sor/--sor-k/--sor-alpha, --srs-drop, or a filter")

    def run(cloud, rel):
        s = path_seed(seed, rel)
        # fixed order: SOR, then SRS, then the low-pass
        if sor_params is not None:
            cloud = sor(cloud, sor_params)
        if args.srs_drop is not None:
            cloud = srs(cloud, args.srs_drop, s)
        if spec is not None:
            cloud = lowpass_cloud(cloud, spec, args.lmax, n_target, s)
        return cloud

    return _map_clouds(args.inp, args.out, run)


def cmd_perturb(args):
    seed, _ = _seed_threads(args)
    kind = args.kind

    def run(cloud, rel):
        spec = PerturbSpec(kind, sigma=args.sigma, count=args.count, r_min=args.r_min,
                           r_max=args.r_max, seed=path_seed(seed, rel))
        return perturb(cloud, spec)

    # validate once before touching files
    PerturbSpec(kind, sigma=args.sigma, count=args.count, r_min=args.r_min, r_max=args.r_max, seed=seed)
    return _map_clouds(args.inp, args.out, run)


def cmd_info(args):
    info = {
        "version": __version__,
        "backend": _accel.backend_name(),
        "numba_installed": _accel.HAVE_NUMBA,
        "defaults": {"bandlimit": DEFAULT_BANDLIMIT, "n_target": DEFAULT_N_TARGET, "gaussian_S": DEFAULT_S,
                     "sor_k": SOR_K, "sor_alpha": SOR_ALPHA},
    }
    if args.inp:
        cloud = load_cloud(args.inp)
        centered, c = center(cloud)
        info["cloud"] = {"path": args.inp, "n_points": len(cloud), "centroid": list(c),
                         "bounding_radius": centered.bounding_radius()}
    print(json.dumps(info, indent=2))
    return EXIT_OK


def build_parser():
    p = _Parser(prog="lpf", description="Spherical-harmonic low-pass filtering of point clouds.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    f = sub.add_parser("filter", help="low-pass one cloud or a directory tree")
    f.add_argument("--in", dest="inp", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--format", default="pclb", help="output format for directory input")
    f.add_argument("--manifest", help="manifest path for single-file input")
    _add_filter_args(f)
    _add_run_args(f)
    f.set_defaults(func=cmd_filter)

    d = sub.add_parser("dataset", help="generate an LPF1/LPF2 defense dataset")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--mode", choices=[LPF1, LPF2, "lpf1", "lpf2"], default=LPF2)
    d.add_argument("--format", default="pclb")
    _add_filter_args(d)
    _add_run_args(d)
    d.set_defaults(func=cmd_dataset)

    a = sub.add_parser("analyze", help="Dis_Coef between aligned original/perturbed trees")
    a.add_argument("--org", required=True)
    a.add_argument("--adv", required=True)
    a.add_argument("--out", required=True, help="directory for the CSV outputs")
    a.add_argument("--lmax", type=int, default=ANALYSIS_BANDLIMIT)
    a.add_argument("--eps", type=float, default=DEFAULT_EPS)
    _add_run_args(a)
    a.set_defaults(func=cmd_analyze)

    pp = sub.add_parser("preprocess", help="SOR, SRS and/or low-pass, in that order")
    pp.add_argument("--in", dest="inp", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--sor", action="store_true", help=f"SOR with k={SOR_K}, alpha={SOR_ALPHA}")
    pp.add_argument("--sor-k", type=int)
    pp.add_argument("--sor-alpha", type=float)
    pp.add_argument("--srs-drop", type=int)
    _add_filter_args(pp, n_default=0)
    _add_run_args(pp)
    pp.set_defaults(func=cmd_preprocess)

    pt = sub.add_parser("perturb", help="synthetic shift/add/drop perturbations")
    pt.add_argument("--in", dest="inp", required=True)
    pt.add_argument("--out", required=True)
    pt.add_argument("--kind", choices=["shift", "add", "drop"], required=True)
    pt.add_argument("--sigma", type=float, default=0.0)
    pt.add_argument("--count", type=int, default=0)
    pt.add_argument("--r-min", type=float)
    pt.add_argument("--r-max", type=float)
    _add_run_args(pt)
    pt.set_defaults(func=cmd_perturb)

    i = sub.add_parser("info", help="backend, defaults and optional cloud summary")
    i.add_argument("--in", dest="inp")
    i.set_defaults(func=cmd_info)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lpf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, EmptyCloud) as exc:
        print(f"lpf: {exc}", file=sys.stderr)
        return EXIT_IO
    except LPFError as exc:
        # parameter validation failures (bad bandlimit, filter, SOR params...)
        print(f"lpf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"lpf: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
