from importlib import resources
from pathlib import Path

from nzgeom import triangulation


def fixture(name):
    path = Path(str(resources.files("nzgeom") / "fixtures" / f"{name}.tri"))
    T = triangulation.load_triangulation(path)
    return T, triangulation.derive_edge_matrices(T)
