import numpy as np
import pytest

from hpquad.builder import HPIndex, PointSet
from hpquad.morton import GridSpec
from hpquad.oracle import gen_clustered, gen_uniform, make_cluster_spec

# 16x16 worked example: heavy paths and per-depth L vectors, dashes mark
# positions a path does not cover yet.
EXAMPLE_H = "000000110 10010100 1100010 110111 001001 10010 1010 1000 1110 1110 010 10 1 1"
EXAMPLE_L = [
    "1--------",
    "-1------- 0-------",
    "--1------ -0------ 1------",
    "---1----- --0----- -0----- 0----- 0-----",
    "----1---- ---0---- --1---- -1---- -0---- 1----",
    "-----0--- ----1--- ---0--- --0--- --0--- -0--- 0--- 0--- 0--- 0---",
    "------0-- -----1-- ----0-- ---0-- ---0-- --0-- -0-- -0-- -0-- -0-- 0--",
    "-------1- ------0- -----0- ----0- ----0- ---0- --1- --0- --0- --0- -0- 0-",
]


def strip(s: str) -> str:
    return "".join(c for c in s if c in "01")


@pytest.fixture
def example_index() -> HPIndex:
    return HPIndex.from_strings(EXAMPLE_H, EXAMPLE_L, 4)


def random_pointset(rng: np.random.Generator, lg_u: int, clustered: bool) -> PointSet:
    grid = GridSpec(lg_u)
    n = int(rng.integers(0, min(4096, grid.u * grid.u // 2) + 1))
    seed = int(rng.integers(2**31))
    if clustered and n:
        c = int(rng.integers(1, 9))
        side = int(rng.integers(1, max(1, grid.u // 4) + 1))
        n = min(n, c * side * side)
        return gen_clustered(make_cluster_spec(c, n, side, grid, seed), grid, seed)
    return gen_uniform(n, grid, seed)



def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(LINES, key=lambda k: int(k.split()[0][1:])):
            terminalreporter.write_line(LINES[key])
