import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# expressions shipped with the catalog, plus a few that exercise every function
CORPUS = [
    "log(x1^2+x2^2)",
    "x1/(x1^2+x2^2)",
    "log((x1^2+x2^2)/(2*(x2+sqrt(x2^2+(x1^2+x2^2)^2))))",
    "-(2*x2)/sqrt((x1^2+x2^2)*(x1^2+5*x2^2))",
    "(2*x1)/sqrt((x1^2+x2^2)*(x1^2+5*x2^2))",
    "(2*x1*x2)/((x1^2+x2^2)*sqrt((x1^2+x2^2)^2+x2^2))",
    "(x2^2-x1^2)/((x1^2+x2^2)*sqrt((x1^2+x2^2)^2+x2^2))",
    "0.25*x1+0.25*x2",
    "3",
    "sin(x1)*cos(x2)+exp(-x1^2)",
    "atan(x1/x2)+asinh(x1*x2)",
    "abs(x1-0.5)^3+x2^(1/2)",
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def halfplane_points(rng, n, box=(-3.0, 3.0, 0.2, 3.0)):
    return list(zip(rng.uniform(box[0], box[1], n), rng.uniform(box[2], box[3], n)))
