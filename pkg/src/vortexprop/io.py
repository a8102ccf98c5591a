"""On-disk formats: slice CSV, PPM heatmaps, npz frames and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import zipfile
from pathlib import Path

import numpy as np

from .errors import ManifestMismatch, MissingFrames
from .grid import ComplexField, GridSpec, SeparableField

FORMAT_VERSION = 1


# -- slices -----------------------------------------------------------------

def write_slice_csv(path, field: ComplexField, scenario: str, plane: str, offset: float,
                    stride: int = 1) -> None:
    """Rows ``coord1,coord2,re,im,abs2`` in row-major order, floats via repr."""
    a0, a1 = field.grid.axis(0)[::stride], field.grid.axis(1)[::stride]
    data = field.data[::stride, ::stride]
    with open(path, "w", newline="") as fh:
        fh.write(f"# scenario={scenario} t={field.t!r} plane={plane} offset={float(offset)!r} "
                 f"format_version={FORMAT_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        for i, c0 in enumerate(a0):
            for j, c1 in enumerate(a1):
                v = data[i, j]
                w.writerow((repr(float(c0)), repr(float(c1)), repr(float(v.real)), repr(float(v.imag)),
                            repr(float(abs(v) ** 2))))


def read_slice_csv(path):
    """Return (header dict, array of shape (rows, 5))."""
    with open(path) as fh:
        head = fh.readline().lstrip("#").split()
        meta = dict(item.split("=", 1) for item in head)
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    return meta, rows


# -- heatmaps ---------------------------------------------------------------

# anchor colours of a perceptually ordered dark-blue -> green -> yellow ramp
_RAMP_ANCHORS = np.array([
    [68, 1, 84], [72, 40, 120], [62, 74, 137], [49, 104, 142], [38, 130, 142],
    [31, 158, 137], [53, 183, 121], [109, 205, 89], [180, 222, 44], [253, 231, 37],
], dtype=float)


def _build_table(anchors: np.ndarray, n: int = 256) -> np.ndarray:
    pos = np.linspace(0, 1, len(anchors))
    x = np.linspace(0, 1, n)
    return np.stack([np.interp(x, pos, anchors[:, c]) for c in range(3)], axis=1).round().astype(np.uint8)


INTENSITY_TABLE = _build_table(_RAMP_ANCHORS)
DIVERGING_TABLE = _build_table(np.array([[33, 102, 172], [146, 197, 222], [247, 247, 247],
                                         [244, 165, 130], [178, 24, 43]], dtype=float))


def write_ppm(path, rgb: np.ndarray) -> None:
    """Binary P6 image; ``rgb`` has shape (rows, cols, 3) and dtype uint8."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8)[: w * h * 3].reshape(h, w, 3)


def _to_image(values: np.ndarray) -> np.ndarray:
    # first grid axis runs left to right, second bottom to top
    return np.flipud(values.T)


def intensity_image(field: ComplexField, gamma: float = 0.5) -> np.ndarray:
    rho = np.abs(field.data) ** 2
    peak = rho.max()
    level = (rho / peak) ** gamma if peak > 0 else np.zeros_like(rho)
    idx = np.clip((level * 255).round().astype(int), 0, 255)
    return INTENSITY_TABLE[_to_image(idx)]


def real_part_image(field: ComplexField) -> np.ndarray:
    re = field.data.real
    scale = np.abs(re).max()
    level = 0.5 + 0.5 * re / scale if scale > 0 else np.full(re.shape, 0.5)
    idx = np.clip((level * 255).round().astype(int), 0, 255)
    return DIVERGING_TABLE[_to_image(idx)]


# -- frames -----------------------------------------------------------------

def _grid_arrays(prefix: str, grid: GridSpec) -> dict:
    return {f"{prefix}_extents": np.array(grid.extents), f"{prefix}_counts": np.array(grid.counts),
            f"{prefix}_labels": np.array(grid.labels)}


def _grid_from(npz, prefix: str) -> GridSpec:
    return GridSpec(tuple(map(tuple, npz[f"{prefix}_extents"])), tuple(npz[f"{prefix}_counts"]),
                    tuple(str(s) for s in npz[f"{prefix}_labels"]))


def save_frame(path, frame: SeparableField) -> None:
    arrays = {"t": np.array(frame.t), "scenario": np.array(frame.scenario),
              "xy": np.array([a.data for a, _ in frame.terms]),
              "z": np.array([b.data for _, b in frame.terms])}
    arrays.update(_grid_arrays("grid_xy", frame.grid_xy))
    arrays.update(_grid_arrays("grid_z", frame.grid_z))
    _write_npz(path, arrays)


def _write_npz(path, arrays: dict) -> None:
    """Like np.savez but with fixed zip timestamps so reruns are byte-identical."""
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            with zf.open(info, "w", force_zip64=True) as fh:
                np.lib.format.write_array(fh, np.asanyarray(arrays[name]), allow_pickle=False)


def load_frame(path) -> SeparableField:
    with np.load(path) as npz:
        t = float(npz["t"])
        scenario = str(npz["scenario"])
        g_xy, g_z = _grid_from(npz, "grid_xy"), _grid_from(npz, "grid_z")
        terms = tuple((ComplexField(g_xy, a, t=t, scenario=scenario), ComplexField(g_z, b, t=t, scenario=scenario))
                      for a, b in zip(npz["xy"], npz["z"]))
    return SeparableField(terms, t=t, scenario=scenario)


# -- manifest ---------------------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(run_dir, config: dict, derived: dict, files, version: str) -> dict:
    run_dir = Path(run_dir)
    manifest = {
        "format_version": FORMAT_VERSION,
        "version": version,
        "config": config,
        "derived": derived,
        "files": {str(f): sha256_file(run_dir / f) for f in sorted(map(str, files))},
    }
    write_json(run_dir / "manifest.json", manifest)
    return manifest


def read_manifest(run_dir, check: bool = True) -> dict:
    """Load manifest.json and, with ``check``, confirm every listed file is intact."""
    run_dir = Path(run_dir)
    path = run_dir / "manifest.json"
    if not path.exists():
        raise MissingFrames(f"no manifest in {run_dir}")
    manifest = json.loads(path.read_text())
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ManifestMismatch(f"unsupported format_version {manifest.get('format_version')}")
    if check:
        for name, digest in manifest["files"].items():
            p = run_dir / name
            if not p.exists():
                raise MissingFrames(f"{name} listed in the manifest is missing")
            if sha256_file(p) != digest:
                raise ManifestMismatch(f"{name} does not match its manifest hash")
    return manifest
