import numpy as np
import pytest
from PIL import Image

LOSSES = [0.0, 0.0123937134544, 0.05, 0.1, 0.225104439431, 0.3, 0.45, 0.6, 0.85, 1.0]


@pytest.fixture(scope="session")
def image_dir(tmp_path_factory):
    """Ten small RGB images named in the Deep Solar Eye style."""
    folder = tmp_path_factory.mktemp("panels")
    rng = np.random.default_rng(0)
    for i, loss in enumerate(LOSSES):
        arr = rng.integers(0, 256, (48, 64, 3), dtype=np.uint8)
        name = f"solar_Wed_Jun_28_10_{i:02d}_55_2017_L_{loss}_I_0.93.jpg"
        Image.fromarray(arr).save(folder / name)
    return folder
