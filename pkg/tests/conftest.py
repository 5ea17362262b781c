import numpy as np
import pytest

from floquet1d import (TrigPoly, OperatorSpec, expand_standard_form,
                       mathieu_spec, free_spec, track_branches, detect_bands,
                       band_nodes)


@pytest.fixture(scope="session")
def mathieu_sf():
    return expand_standard_form(mathieu_spec(1.0))


@pytest.fixture(scope="session")
def mathieu_atlas(mathieu_sf):
    table = track_branches(mathieu_sf, -2.0, 105.0,
                           grid=np.linspace(-2.0, 105.0, 320))
    return detect_bands(table, mathieu_sf)


@pytest.fixture(scope="session")
def n2_sf():
    cos2x = TrigPoly({1: 0.5, -1: 0.5})
    return expand_standard_form(OperatorSpec(2, (cos2x, cos2x)))


@pytest.fixture(scope="session")
def n2_atlas(n2_sf):
    table = track_branches(n2_sf, -2.0, 700.0,
                           grid=np.linspace(-2.0, 700.0, 400))
    return detect_bands(table, n2_sf)


@pytest.fixture(scope="session")
def free1_sf():
    return expand_standard_form(free_spec(1))


@pytest.fixture(scope="session")
def free1_atlas(free1_sf):
    table = track_branches(free1_sf, -1.0, 26.0,
                           grid=np.linspace(-1.0, 26.0, 160))
    return detect_bands(table, free1_sf)
