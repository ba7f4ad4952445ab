"""LPF1 / LPF2 defense-dataset generation over a class-per-directory tree.

LPF1 writes the low-passed version of every input cloud; LPF2 writes the
original next to it.  Files are processed in a thread pool; each file's
random stream is derived from the job seed and its relative path, so outputs
do not depend on scheduling.  The manifest is sorted by path before writing.
"""
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cloudio import SUFFIXES, CloudFormat, encode_cloud, load_cloud
from .errors import CloudIOError, LPFError
from .lpf import DEFAULT_BANDLIMIT, DEFAULT_N_TARGET, FilterSpec, lowpass_cloud, path_seed

log = logging.getLogger(__name__)

LPF1 = "LPF1"
LPF2 = "LPF2"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class DefenseDatasetJob:
    input_root: str
    output_root: str
    mode: str = LPF2
    filter: FilterSpec = field(default_factory=FilterSpec)
    bandlimit: int = DEFAULT_BANDLIMIT
    n_target: Optional[int] = DEFAULT_N_TARGET
    seed: int = 0
    out_format: CloudFormat = CloudFormat.PCLB

    def __post_init__(self):
        if self.mode not in (LPF1, LPF2):
            raise ValueError(f"mode must be LPF1 or LPF2, got {self.mode!r}")
        if self.n_target is not None and self.n_target < 1:
            raise ValueError(f"n_target must be >= 1, got {self.n_target}")

    def params(self):
        """Job description recorded in the manifest (no thread count, no timings)."""
        return {
            "input_root": str(self.input_root),
            "output_root": str(self.output_root),
            "mode": self.mode,
            "filter": self.filter.params(),
            "bandlimit": self.bandlimit,
            "n_target": self.n_target,
            "seed": self.seed,
            "format": CloudFormat(self.out_format).value,
        }


def iter_dataset(root):
    """Sorted ``(relative posix path, label)`` for every cloud file under ``root``.

    The label is the first directory below ``root`` (the class folder).
    """
    root = Path(root)
    if not root.is_dir():
        raise CloudIOError(f"not a directory: {root}")
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            if Path(name).suffix.lower() in SUFFIXES:
                rel = (Path(dirpath) / name).relative_to(root).as_posix()
                parts = rel.split("/")
                found.append((rel, parts[0] if len(parts) > 1 else None))
    return sorted(found)


def digest(data):
    return hashlib.sha256(data).hexdigest()


def _write(path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def output_name(rel, variant, fmt):
    stem = rel.rsplit(".", 1)[0]
    return f"{stem}_{variant}.{CloudFormat(fmt).value}"


def process_file(job, rel, label):
    """Run one file; returns ``(outputs, failure)``."""
    src = Path(job.input_root) / rel
    try:
        cloud = load_cloud(src, label=label)
        seed = path_seed(job.seed, rel)
        lp = lowpass_cloud(cloud, job.filter, job.bandlimit, job.n_target, seed)
        variants = [("lp", lp)]
        if job.mode == LPF2:
            variants.insert(0, ("orig", cloud))
        outputs = []
        for variant, c in variants:
            dst = output_name(rel, variant, job.out_format)
            data = encode_cloud(c, job.out_format)
            _write(Path(job.output_root) / dst, data)
            outputs.append({
                "src": rel,
                "dst": dst,
                "mode": job.mode,
                "variant": "original" if variant == "orig" else "lowpass",
                "label": label,
                "digest": digest(data),
                "n_points": len(c),
            })
        return outputs, None
    except (LPFError, OSError, ValueError) as exc:
        log.warning("failed on %s: %s", rel, exc)
        return [], {"src": rel, "error": f"{type(exc).__name__}: {exc}"}


def build_manifest(job_params, results):
    outputs = sorted((o for outs, _ in results for o in outs), key=lambda o: o["dst"])
    failures = sorted((f for _, f in results if f is not None), key=lambda f: f["src"])
    return {"job": job_params, "outputs": outputs, "failures": failures}


def write_manifest(manifest, path):
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)
    return text


def run_files(job, files, threads=1):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda f: process_file(job, *f), files))
    return [process_file(job, *f) for f in files]


def make_defense_dataset(job, threads=1, files=None):
    """Generate the dataset and write ``manifest.json`` into the output root."""
    if files is None:
        files = iter_dataset(job.input_root)
    Path(job.output_root).mkdir(parents=True, exist_ok=True)
    manifest = build_manifest(job.params(), run_files(job, files, threads))
    write_manifest(manifest, Path(job.output_root) / MANIFEST_NAME)
    return manifest
