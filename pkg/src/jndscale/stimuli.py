"""Stimulus metadata and the on-disk stimulus store.

Store layout: ``<root>/<source_id>/<codec_id>/<level>_{plain|boosted|zoomed_src}.png``.
The level-0 original lives under the pseudo-codec ``source``; its zoomed
variant (needed for flicker display next to boosted images) is written once
per source as ``<root>/<source_id>/source/0_zoomed_src.png``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import imaging

SOURCE_CODEC = "source"


class StimulusError(ValueError):
    """Raised for inconsistent stimulus metadata."""


@dataclass(frozen=True)
class Stimulus:
    source_id: str
    codec_id: str
    level: int
    image_path: Path | None = None
    boosted: bool = False

    def __post_init__(self):
        if not 0 <= self.level <= 10:
            raise StimulusError(f"level must be in 0..10, got {self.level}")
        if (self.level == 0) != (self.codec_id == SOURCE_CODEC):
            raise StimulusError(
                f"level 0 and codec '{SOURCE_CODEC}' imply each other, "
                f"got level={self.level} codec={self.codec_id!r}"
            )


@dataclass(frozen=True)
class BoostConfig:
    amplification_factor: float = 2.0
    zoom_enabled: bool = True
    lanczos_taps: int = 3

    def __post_init__(self):
        if self.amplification_factor < 1:
            raise StimulusError(
                f"amplification factor must be >= 1, got {self.amplification_factor}"
            )


def source_stimulus(source_id: str, image_path: Path | None = None) -> Stimulus:
    return Stimulus(source_id=source_id, codec_id=SOURCE_CODEC, level=0, image_path=image_path)


def plain_path(root, stim: Stimulus) -> Path:
    return Path(root) / stim.source_id / stim.codec_id / f"{stim.level}_plain.png"


def boosted_path(root, stim: Stimulus) -> Path:
    return Path(root) / stim.source_id / stim.codec_id / f"{stim.level}_boosted.png"


def zoomed_source_path(root, source_id: str) -> Path:
    return Path(root) / source_id / SOURCE_CODEC / "0_zoomed_src.png"


def prepare_boosted_stimulus(
    source: Stimulus,
    distorted: Stimulus,
    config: BoostConfig,
    store_root,
) -> Stimulus:
    """Zoom the source/distorted pair, amplify artifacts, write both outputs.

    The boosted image lands at the distorted stimulus's ``_boosted`` slot and
    the zoomed source at ``0_zoomed_src.png`` (the flicker counterpart).
    Flicker itself happens at presentation time, not here.
    """
    if source.source_id != distorted.source_id:
        raise StimulusError(
            f"source ids differ: {source.source_id!r} vs {distorted.source_id!r}"
        )
    if source.level != 0:
        raise StimulusError("the reference stimulus must be the level-0 source")
    src_img = imaging.load_png(source.image_path)
    dst_img = imaging.load_png(distorted.image_path)
    if config.zoom_enabled:
        src_img = imaging.zoom_boost(src_img, config.lanczos_taps)
        dst_img = imaging.zoom_boost(dst_img, config.lanczos_taps)
    boosted = imaging.amplify_artifacts(src_img, dst_img, config.amplification_factor)

    out_path = boosted_path(store_root, distorted)
    imaging.save_png_atomic(boosted, out_path)
    imaging.save_png_atomic(src_img, zoomed_source_path(store_root, source.source_id))
    return replace(distorted, image_path=out_path, boosted=True)


def prepare_tree(src_dir, out_dir, config: BoostConfig) -> list[Stimulus]:
    """Boost a whole directory of decoded images.

    Expected input layout: ``<src_dir>/<source_id>/source.png`` plus
    ``<src_dir>/<source_id>/<codec_id>/<level>.png`` for the decoded levels.
    Plain copies, boosted images, and the zoomed source are written into the
    store layout under ``out_dir``.
    """
    src_dir = Path(src_dir)
    produced: list[Stimulus] = []
    source_dirs = sorted(p for p in src_dir.iterdir() if p.is_dir())
    if not source_dirs:
        raise StimulusError(f"no source directories found under {src_dir}")
    for sdir in source_dirs:
        source_png = sdir / "source.png"
        if not source_png.exists():
            raise StimulusError(f"missing {source_png}")
        src_stim = source_stimulus(sdir.name, source_png)
        src_img = imaging.load_png(source_png)
        imaging.save_png_atomic(src_img, plain_path(out_dir, src_stim))
        for cdir in sorted(p for p in sdir.iterdir() if p.is_dir()):
            for png in sorted(cdir.glob("*.png")):
                level = int(png.stem)
                stim = Stimulus(sdir.name, cdir.name, level, png)
                imaging.save_png_atomic(imaging.load_png(png), plain_path(out_dir, stim))
                produced.append(prepare_boosted_stimulus(src_stim, stim, config, out_dir))
    return produced
