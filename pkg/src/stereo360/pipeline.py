"""Per-image pipeline: viewports -> per-eye FSIM -> rivalry fusion + depth features."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dataset
from .binocular import EnergyMaps, binocular_quality
from .depth import DEPTH_KINDS, depth_feature, difference_map
from .errors import InvalidParameterError
from .fsim import DEFAULT_PARAMS, FsimParams, fsim
from .projection import StereoErpPair, extract_viewport, to_gray
from .regression import ASSEMBLIES, LAYOUTS, assemble_features
from .viewpoints import SphericalViewpoint, sample_viewpoints

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    n0: int = 8
    fov: float = 90.0
    viewport_size: int | None = None      # None: ERP width / 4
    fsim: FsimParams = DEFAULT_PARAMS
    layout: str = "quality"
    assembly: str = "WQA"
    depth_kind: str = "entropy"

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise InvalidParameterError(f"unknown layout {self.layout!r}")
        if self.assembly not in ASSEMBLIES:
            raise InvalidParameterError(f"unknown assembly {self.assembly!r}")
        if self.depth_kind not in DEPTH_KINDS:
            raise InvalidParameterError(f"unknown depth feature {self.depth_kind!r}")

    def resolved_size(self, erp_width: int) -> int:
        return self.viewport_size if self.viewport_size is not None else erp_width // 4

    def for_target(self, target: str) -> "PipelineConfig":
        """Standard layout per target: WQA qualities, plus depth features for QoE."""
        from dataclasses import replace
        return replace(self, layout="quality+depth" if target == "qoe" else "quality")

    def provenance(self, erp_width: int) -> dict:
        return {
            "n0": self.n0,
            "fov": self.fov,
            "viewport_size": self.resolved_size(erp_width),
            "fsim_flags": self.fsim.as_dict(),
            "layout": self.layout,
            "assembly": self.assembly,
            "depth_kind": self.depth_kind,
            "entropy_base": 2,
        }

    def extraction_key(self, erp_width: int) -> dict:
        # layout/assembly do not affect per-viewport records
        p = self.provenance(erp_width)
        for k in ("layout", "assembly", "depth_kind"):
            p.pop(k)
        return p


@dataclass
class ViewportFeatures:
    latitude: float
    longitude: float
    ring_index: int
    q_left: float
    q_right: float
    g_left: float
    g_right: float
    w_left: float
    w_right: float
    q_fused: float
    depth: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _gray_pair(pair: StereoErpPair) -> tuple[np.ndarray, np.ndarray]:
    return to_gray(pair.left), to_gray(pair.right)


def viewport_features(ref_l, ref_r, dist_l, dist_r, vp: SphericalViewpoint, config: PipelineConfig,
                      dump_dir: Path | None = None, index: int = 0) -> ViewportFeatures:
    size = config.resolved_size(ref_l.shape[1])
    views = [extract_viewport(img, vp, config.fov, size) for img in (ref_l, ref_r, dist_l, dist_r)]
    rl, rr, dl, dr = views
    if dump_dir is not None:
        for tag, v in zip(("ref_left", "ref_right", "dist_left", "dist_right"), views):
            dataset.save_image(dump_dir / f"vp{index:02d}_{tag}.png", v)
    q_l = fsim(rl, dl, config.fsim)
    q_r = fsim(rr, dr, config.fsim)
    bq = binocular_quality(q_l, q_r, EnergyMaps.from_viewports(rl, rr, dl, dr))
    diff = difference_map(dl, dr)
    depth = {k: depth_feature(diff, k) for k in DEPTH_KINDS}
    return ViewportFeatures(vp.latitude, vp.longitude, vp.ring_index, bq.q_left, bq.q_right,
                            bq.g_left, bq.g_right, bq.w_left, bq.w_right, bq.q_fused, depth)


def extract_image_features(ref: StereoErpPair, dist: StereoErpPair, config: PipelineConfig = PipelineConfig(),
                           workers: int = 1, dump_dir=None) -> list[ViewportFeatures]:
    """Per-viewport records for one stereo image, in canonical viewpoint order."""
    if ref.left.shape[:2] != dist.left.shape[:2]:
        raise InvalidParameterError(
            f"reference and distorted ERPs differ in size: {ref.left.shape} vs {dist.left.shape}")
    ref_l, ref_r = _gray_pair(ref)
    dist_l, dist_r = _gray_pair(dist)
    vps = sample_viewpoints(config.n0)
    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)

    def one(i_vp):
        i, vp = i_vp
        return viewport_features(ref_l, ref_r, dist_l, dist_r, vp, config, dump_dir, i)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, enumerate(vps)))
    return [one(x) for x in enumerate(vps)]


def _records_from_json(items) -> list[ViewportFeatures]:
    return [ViewportFeatures(**d) for d in items]


def entry_features(entry: dataset.ManifestEntry, config: PipelineConfig, workers: int = 1) -> list[ViewportFeatures]:
    """Records for one manifest entry, served from the feature cache when enabled."""
    ref = dataset.load_erp_pair(entry.ref_left, entry.ref_right, "reference")
    dist = dataset.load_erp_pair(entry.dist_left, entry.dist_right, "distorted")
    cache = dataset.cache_dir()
    path = None
    if cache is not None:
        key = dataset.array_digest(ref.left, ref.right, dist.left, dist.right)
        prov = dataset.provenance_digest(config.extraction_key(ref.left.shape[1]))
        path = cache / f"{key[:32]}_{prov[:16]}.json"
        if path.is_file():
            return _records_from_json(json.loads(path.read_text()))
    records = extract_image_features(ref, dist, config, workers)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps([r.as_dict() for r in records]))
        tmp.replace(path)
    return records


def manifest_features(entries: Sequence[dataset.ManifestEntry], config: PipelineConfig,
                      workers: int = 1) -> list[list[ViewportFeatures]]:
    out = []
    for i, e in enumerate(entries):
        log.info("features %d/%d: %s", i + 1, len(entries), e.dist_left)
        out.append(entry_features(e, config, workers))
    return out


def feature_matrix(records: Sequence[Sequence[ViewportFeatures]], config: PipelineConfig) -> np.ndarray:
    n = len(sample_viewpoints(config.n0))
    rows = [assemble_features(r, config.layout, config.assembly, config.depth_kind, n) for r in records]
    return np.vstack(rows) if rows else np.empty((0, 0))
