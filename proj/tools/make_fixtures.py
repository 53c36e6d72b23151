#!/usr/bin/env python3
"""Regenerates the bundled fixture corpus under fixtures/.

Natural images come from scikit-image's public-domain samples (camera,
astronaut), converted to one channel. Everything else is synthetic.
"""

import hashlib
import json
import math
import struct
import sys
from pathlib import Path

import numpy as np
from skimage import color, data, transform

SIZE = 64
RATE = 8000


def write_pgm(path: Path, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + img.tobytes())


def write_wav(path: Path, samples: np.ndarray, rate: int = RATE) -> None:
    pcm = np.clip(np.rint(samples * 32768.0), -32768, 32767).astype("<i2").tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16)
    path.write_bytes(header + fmt + b"data" + struct.pack("<I", len(pcm)) + pcm)


def to_u8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def natural(name: str, img: np.ndarray, out: Path) -> None:
    if img.ndim == 3:
        img = color.rgb2gray(img[..., :3])
    img = img.astype(np.float64)
    if img.max() > 1.0:
        img = img / 255.0
    for size in (256, SIZE):
        small = transform.resize(img, (size, size), anti_aliasing=True, order=1)
        write_pgm(out / f"{name}{size}.pgm", to_u8(small * 255.0))


def synthetic_images(out: Path) -> None:
    r, c = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    write_pgm(out / "ramp64.pgm", to_u8(255.0 * (r + c) / (2 * (SIZE - 1))))
    write_pgm(out / "checker64.pgm", np.where(((r // 8) + (c // 8)) % 2 == 0, 32, 223).astype(np.uint8))
    # periodic over the 64-sample lattice: exactly band-limited up to quantization
    y = 0.5 * np.cos(2 * math.pi * 3 * c / SIZE) + 0.4 * np.cos(2 * math.pi * (2 * r + c) / SIZE)
    write_pgm(out / "cosine64.pgm", to_u8((y + 1.0) * 127.5))
    write_pgm(out / "edge64.pgm", np.where(c < SIZE // 2, 32, 223).astype(np.uint8))


def audio(out: Path) -> None:
    t = np.arange(RATE) / RATE
    write_wav(out / "tone440.wav", 0.8 * np.sin(2 * math.pi * 440 * t))
    f0, f1 = 100.0, 2000.0
    write_wav(out / "chirp.wav", 0.8 * np.sin(2 * math.pi * (f0 * t + 0.5 * (f1 - f0) * t * t)))
    mix = 0.4 * np.sin(2 * math.pi * 220 * t) + 0.3 * np.sin(2 * math.pi * 550 * t) + 0.2 * np.sin(2 * math.pi * 1330 * t)
    write_wav(out / "mixture.wav", mix)


def video(out: Path) -> None:
    d = out / "square_video"
    d.mkdir(exist_ok=True)
    files = []
    for f in range(8):
        frame = np.full((16, 16), 32, dtype=np.uint8)
        frame[2 + f : 7 + f, 1 + f : 6 + f] = 224
        name = f"frame_{f:04d}.pgm"
        write_pgm(d / name, frame)
        files.append(name)
    (d / "manifest.json").write_text(json.dumps({"frames": 8, "width": 16, "height": 16, "files": files}, indent=2) + "\n")


def checksums(out: Path) -> None:
    lines = []
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "SHA256SUMS":
            lines.append(f"{hashlib.sha256(p.read_bytes()).hexdigest()}  {p.relative_to(out).as_posix()}")
    (out / "SHA256SUMS").write_text("\n".join(lines) + "\n")


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    out.mkdir(parents=True, exist_ok=True)
    natural("natural", data.camera(), out)
    natural("astronaut", data.astronaut(), out)
    synthetic_images(out)
    audio(out)
    video(out)
    checksums(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
