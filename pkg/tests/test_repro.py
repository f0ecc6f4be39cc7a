import numpy as np
import pytest

from totalcurv.repro import PCD_HEADER, TABLE3_HEADER, markdown_table, table3, torus_cloud


def test_table3_reference_torus_values():
    # known per-vertex density errors of the R=1, r=0.5 torus on 9, 18 and 36 grids
    rows = table3(R=1.0, r=0.5, subdivisions=())
    assert [round(r[5], 4) for r in rows] == [0.4759, 0.1425, 0.0372]


def test_table3_layout():
    rows = table3(subdivisions=(2,), grids=(9,))
    assert [len(r) for r in rows] == [len(TABLE3_HEADER)] * 2
    assert rows[0][4] < 1e-12
    md = markdown_table(TABLE3_HEADER, rows)
    assert md.count("\n") == 4 and "9x9" in md


def test_torus_cloud_is_on_surface():
    pos, nrm, dens = torus_cloud("sparse", n_sparse=300, mesh_resolution=(60, 30))
    rho = np.hypot(pos[:, 0], pos[:, 1])
    assert np.allclose((rho - 2) ** 2 + pos[:, 2] ** 2, 1.0)
    assert dens.min() >= 1.0 - 1e-12 and dens.max() <= 2.0 + 1e-12
    with pytest.raises(ValueError):
        torus_cloud("clustered")
    assert PCD_HEADER[0] == "row"
