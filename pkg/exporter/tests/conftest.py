from __future__ import annotations

import json

import pytest
import torch
from PIL import Image


class TinyEncoder(torch.nn.Module):
    """Minimal two-tower module satisfying the checkpoint contract."""

    def __init__(self, dim=32, image_size=16, vocab=128, max_len=24):
        super().__init__()
        self.image_size = image_size
        self.vocab_size = vocab
        self.max_text_len = max_len
        self.embed_dim = dim
        self.conv = torch.nn.Conv2d(3, dim, kernel_size=image_size)
        self.embed = torch.nn.EmbeddingBag(vocab, dim, mode="mean")

    @torch.jit.export
    def encode_image(self, pixels: torch.Tensor) -> torch.Tensor:
        return self.conv(pixels).flatten(1)

    @torch.jit.export
    def encode_text(self, ids: torch.Tensor) -> torch.Tensor:
        return self.embed(ids)

    def forward(self, pixels: torch.Tensor) -> torch.Tensor:
        return self.encode_image(pixels)


@pytest.fixture(scope="session")
def checkpoint_path(tmp_path_factory):
    torch.manual_seed(7)
    path = tmp_path_factory.mktemp("ckpt") / "tiny-encoder.pt"
    torch.jit.script(TinyEncoder()).save(str(path))
    return path


@pytest.fixture()
def image_root(tmp_path):
    root = tmp_path / "images"
    root.mkdir()
    Image.new("RGB", (20, 24), (120, 40, 200)).save(root / "img-a.png")
    Image.new("L", (16, 16), 77).save(root / "img-b.jpg")
    return root


@pytest.fixture()
def manifest_path(tmp_path):
    path = tmp_path / "manifest.jsonl"
    rows = [
        {
            "study_id": "a",
            "image_id": "img-a",
            "reference_text": "The lungs are clear.",
            "candidate_text": "No acute findings are seen.",
        },
        {
            "study_id": "b",
            "image_id": "img-b",
            "reference_text": "Small left effusion persists.",
            "candidate_text": "There is a small left effusion.",
        },
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return path
