import pytest

from costcode import CostModel, IIDSource, MixedSource

# the shipped test instances: four sources crossed with three binary cost models


@pytest.fixture(scope="session")
def shipped_sources():
    # the two mixtures pair the weights with opposite components
    return {
        "bern50": IIDSource((0.5, 0.5)),
        "bern25": IIDSource((0.75, 0.25)),
        "bern30": IIDSource((0.7, 0.3)),
        "mixed": MixedSource(
            components=(IIDSource((0.5, 0.5)), IIDSource((0.89, 0.11))),
            weights=(0.4, 0.6),
        ),
        "mixed_alt": MixedSource(
            components=(IIDSource((0.89, 0.11)), IIDSource((0.5, 0.5))),
            weights=(0.4, 0.6),
        ),
    }


@pytest.fixture(scope="session")
def shipped_models():
    return {
        "unit": CostModel(2, (1.0, 1.0)),
        "c12": CostModel(2, (1.0, 2.0)),
        "c13": CostModel(2, (1.0, 3.0)),
    }
