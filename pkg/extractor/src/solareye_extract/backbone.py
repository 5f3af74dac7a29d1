"""ResNet-50 convolutional base with configurable pooling and weights.

Weight sources:
  "pretrained"     torchvision's ImageNet weights (needs the download or a
                   warm local cache)
  "random:<seed>"  deterministic seeded initialization — useful for
                   pipeline testing when pretrained weights are
                   unavailable; feature quality is meaningless
  <path>           a state-dict file for the full resnet50 module

Preprocessing is fixed (resize to 224x224 bilinear, ImageNet channel
statistics), so the pooled width is 2048 and the flattened width
7*7*2048 = 100352 regardless of source resolution.
"""

from __future__ import annotations

import numpy as np
import torch
from PIL import Image
from torchvision.models import resnet50

POOLED_DIM = 2048
FLATTENED_DIM = 7 * 7 * 2048
INPUT_SIZE = 224
_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)

POOLING_MODES = ("global_average", "flatten")


def build_backbone(weights: str = "pretrained") -> torch.nn.Module:
    if weights == "pretrained":
        try:
            from torchvision.models import ResNet50_Weights
            model = resnet50(weights=ResNet50_Weights.IMAGENET1K_V2)
        except Exception as exc:
            raise RuntimeError(
                "pretrained ResNet-50 weights unavailable (no network/cache); "
                "pass --weights <state-dict path> or --weights random:<seed> "
                f"(original error: {exc})"
            ) from exc
    elif weights.startswith("random:"):
        torch.manual_seed(int(weights.split(":", 1)[1]))
        model = resnet50(weights=None)
    else:
        model = resnet50(weights=None)
        state = torch.load(weights, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    # drop avgpool + fc: keep the convolutional base (N, 2048, 7, 7)
    base = torch.nn.Sequential(*list(model.children())[:-2])
    base.eval()
    return base


def preprocess(image: Image.Image) -> np.ndarray:
    """(3, 224, 224) float32, channel-normalized."""
    rgb = image.convert("RGB").resize((INPUT_SIZE, INPUT_SIZE), Image.BILINEAR)
    arr = np.asarray(rgb, dtype=np.float32) / 255.0
    arr = (arr - _MEAN) / _STD
    return arr.transpose(2, 0, 1)


@torch.no_grad()
def embed_batch(base: torch.nn.Module, batch: np.ndarray, pooling: str) -> np.ndarray:
    """(B, 3, 224, 224) -> (B, POOLED_DIM) or (B, FLATTENED_DIM) float32."""
    if pooling not in POOLING_MODES:
        raise ValueError(f"unknown pooling mode {pooling!r}")
    fmap = base(torch.from_numpy(batch))
    if pooling == "global_average":
        out = fmap.mean(dim=(2, 3))
    else:
        out = fmap.flatten(start_dim=1)
    return out.numpy().astype(np.float32)
