import numpy as np
import pytest

from nysfilter import Image


def _to_image(rgb_u8: np.ndarray) -> Image:
    return Image(data=np.moveaxis(rgb_u8, 2, 0).astype(np.float64), range_max=255.0)


@pytest.fixture(scope="session")
def astronaut_256() -> Image:
    from skimage import data

    return _to_image(data.astronaut()[120:376, 120:376])


@pytest.fixture(scope="session")
def chelsea_256() -> Image:
    from skimage import data

    return _to_image(data.chelsea()[22:278, 100:356])


@pytest.fixture(scope="session")
def coffee_256() -> Image:
    from skimage import data

    return _to_image(data.coffee()[72:328, 172:428])


@pytest.fixture(scope="session")
def natural_images(astronaut_256, chelsea_256, coffee_256) -> list[Image]:
    return [astronaut_256, chelsea_256, coffee_256]


def crop(img: Image, size: int, y0: int = 0, x0: int = 0) -> Image:
    return Image(data=img.data[:, y0:y0 + size, x0:x0 + size], range_max=img.range_max)
