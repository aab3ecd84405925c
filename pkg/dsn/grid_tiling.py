"""
Grid Tiling
k x k arrays of subsets of [n] x [n]: instances, brute-force solving and the
interior-shift normalization used before building gadgets
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Mapping, Optional, Set, Tuple

from dsn.digraph import GraphError

logger = logging.getLogger(__name__)

Entry = Tuple[int, int]
Assignment = Dict[Tuple[int, int], Entry]


@dataclass(frozen=True)
class GridTilingInstance:
    """
    Cell (i,j) sits in column i and row j (both 1-based). A solution picks
    (x,y) in every cell so that x is constant down each column and y is
    constant along each row.
    """
    k: int
    n: int
    sets: Tuple[Tuple[FrozenSet[Entry], ...], ...]

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise GraphError("k and n must be positive")
        if len(self.sets) != self.k or any(len(col) != self.k for col in self.sets):
            raise GraphError(f"expected a {self.k}x{self.k} array of sets")
        for i, col in enumerate(self.sets, start=1):
            for j, cell in enumerate(col, start=1):
                if not cell:
                    raise GraphError(f"cell ({i},{j}) is empty")
                for x, y in cell:
                    if not (1 <= x <= self.n and 1 <= y <= self.n):
                        raise GraphError(f"entry ({x},{y}) of cell ({i},{j}) outside [1,{self.n}]^2")

    @classmethod
    def from_cells(cls, k: int, n: int, cells: Mapping[Tuple[int, int], Set[Entry]]) -> 'GridTilingInstance':
        sets = tuple(tuple(frozenset(cells.get((i, j), ())) for j in range(1, k + 1))
                     for i in range(1, k + 1))
        return cls(k, n, sets)

    def cell(self, i: int, j: int) -> FrozenSet[Entry]:
        return self.sets[i - 1][j - 1]

    @property
    def interior(self) -> bool:
        """Every entry satisfies 1 < x,y < n"""
        return all(1 < x < self.n and 1 < y < self.n
                   for col in self.sets for cell in col for x, y in cell)

    def check_interior(self):
        for i in range(1, self.k + 1):
            for j in range(1, self.k + 1):
                for x, y in self.cell(i, j):
                    if not (1 < x < self.n and 1 < y < self.n):
                        raise GraphError(
                            f"entry ({x},{y}) of cell ({i},{j}) violates 1 < x,y < {self.n}; "
                            f"normalize the instance first")


def normalize(gt: GridTilingInstance) -> GridTilingInstance:
    """Grow n by two and shift every entry by one so all entries are interior"""
    sets = tuple(tuple(frozenset((x + 1, y + 1) for x, y in cell) for cell in col)
                 for col in gt.sets)
    return GridTilingInstance(gt.k, gt.n + 2, sets)


def check_assignment(gt: GridTilingInstance, assignment: Assignment) -> bool:
    """Independent constraint check of a claimed solution"""
    for i in range(1, gt.k + 1):
        for j in range(1, gt.k + 1):
            entry = assignment.get((i, j))
            if entry is None or entry not in gt.cell(i, j):
                return False
            if entry[0] != assignment[(i, 1)][0] or entry[1] != assignment[(1, j)][1]:
                return False
    return True


def grid_tiling_solve(gt: GridTilingInstance) -> Optional[Assignment]:
    """
    Brute force over row values; columns are then independent

    Returns the witness with lexicographically least (row values, column values),
    or None when the instance has no solution.
    """
    for ys in itertools.product(range(1, gt.n + 1), repeat=gt.k):
        xs = []
        for i in range(1, gt.k + 1):
            x = next((x for x in range(1, gt.n + 1)
                      if all((x, ys[j - 1]) in gt.cell(i, j) for j in range(1, gt.k + 1))), None)
            if x is None:
                break
            xs.append(x)
        else:
            logger.debug("grid tiling solved with rows %s and columns %s", ys, xs)
            return {(i, j): (xs[i - 1], ys[j - 1])
                    for i in range(1, gt.k + 1) for j in range(1, gt.k + 1)}
    return None
