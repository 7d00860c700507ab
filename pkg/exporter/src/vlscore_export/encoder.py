"""TorchScript checkpoint adapter.

Checkpoint contract: a ``torch.jit`` archive exposing

    encode_image(pixels: float32 [B, 3, S, S]) -> float32 [B, D]
    encode_text(ids: int64 [B, L]) -> float32 [B, D]

with integer attributes ``image_size`` (S), ``embed_dim`` (D), ``vocab_size``
and ``max_text_len`` (L). Images are loaded with Pillow, converted to RGB,
resized to S x S and scaled to [0, 1]; text is tokenized by a stable hashing
tokenizer (id 0 is padding). Which pooling layer of a public checkpoint this
corresponds to is up to whoever scripted it, so the preprocessing recipe is
recorded in the exported model_tag.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .format import ExportError

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_IMAGE_SUFFIXES = ("", ".png", ".jpg", ".jpeg")

_REQUIRED_ATTRS = ("image_size", "embed_dim", "vocab_size", "max_text_len")


def hash_token_ids(text: str, vocab_size: int, max_len: int) -> list[int]:
    """Deterministic token ids in [1, vocab_size); 0 pads."""
    ids = []
    for token in _TOKEN_RE.findall(text.lower())[:max_len]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=4).digest()
        ids.append(int.from_bytes(digest, "little") % (vocab_size - 1) + 1)
    ids.extend(0 for _ in range(max_len - len(ids)))
    return ids


@dataclass
class CheckpointEncoder:
    module: torch.jit.ScriptModule
    image_size: int
    embed_dim: int
    vocab_size: int
    max_text_len: int

    @classmethod
    def load(cls, checkpoint_ref: str | Path) -> "CheckpointEncoder":
        try:
            module = torch.jit.load(str(checkpoint_ref), map_location="cpu")
        except (OSError, RuntimeError, ValueError) as exc:
            raise ExportError(f"cannot load checkpoint {checkpoint_ref}: {exc}") from None
        for method in ("encode_image", "encode_text"):
            if not hasattr(module, method):
                raise ExportError(f"checkpoint {checkpoint_ref} lacks required method {method!r}")
        attrs = {}
        for name in _REQUIRED_ATTRS:
            if not hasattr(module, name):
                raise ExportError(f"checkpoint {checkpoint_ref} lacks required attribute {name!r}")
            attrs[name] = int(getattr(module, name))
        module.eval()
        return cls(module=module, **attrs)

    @property
    def preprocessing_tag(self) -> str:
        return f"ts:encode_image+encode_text|img{self.image_size}px|hashvocab{self.vocab_size}"

    def _resolve_image(self, image_root: Path, image_id: str) -> Path:
        for suffix in _IMAGE_SUFFIXES:
            path = image_root / f"{image_id}{suffix}"
            if path.is_file():
                return path
        raise ExportError(f"no image file for id {image_id!r} under {image_root}")

    def load_image(self, image_root: Path, image_id: str) -> torch.Tensor:
        path = self._resolve_image(image_root, image_id)
        try:
            with Image.open(path) as img:
                rgb = img.convert("RGB").resize((self.image_size, self.image_size))
        except OSError as exc:
            raise ExportError(f"unreadable image {path}: {exc}") from None
        array = np.asarray(rgb, dtype=np.float32) / 255.0
        return torch.from_numpy(array).permute(2, 0, 1)

    @torch.no_grad()
    def encode_images(self, pixels: list[torch.Tensor]) -> np.ndarray:
        batch = torch.stack(pixels)
        return self.module.encode_image(batch).cpu().numpy().astype(np.float64)

    @torch.no_grad()
    def encode_texts(self, texts: list[str]) -> np.ndarray:
        ids = torch.tensor(
            [hash_token_ids(t, self.vocab_size, self.max_text_len) for t in texts],
            dtype=torch.int64,
        )
        return self.module.encode_text(ids).cpu().numpy().astype(np.float64)


def set_deterministic(seed: int = 0) -> None:
    """Best-effort bitwise reproducibility for CPU inference."""
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True)
    torch.set_num_threads(1)
