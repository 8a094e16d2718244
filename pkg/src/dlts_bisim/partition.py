"""Array-backed refinable partition of 0..n with an O(|X|) split primitive.

All states live in one permutation array; the states of a block occupy a
contiguous subarray, so a block is fully described by a (left, right) index
pair.  Splitting swaps hit states to the left end of their block and moves
the boundary, which keeps every previously recorded (left, right) range valid
as a set of states even while the blocks inside it split further.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


class PartitionError(ValueError):
    """The given blocks do not form a partition of the state range."""


@dataclass
class BlockDesc:
    """One block: its subarray bounds, worklist-membership flag, split cursor.

    `marked` counts states already swapped to the block's left end during an
    ongoing split call; it is 0 whenever no split is in progress.
    """

    left: int
    right: int
    in_splitter_union: bool = False
    marked: int = 0

    @property
    def size(self) -> int:
        return self.right - self.left


@dataclass
class SplitRecord:
    """Outcome of splitting one block.

    `left`/`right` are the bounds of the block *before* the split (the two
    children tile this range exactly); `child_in` is the id of the part that
    met the splitting set, `child_out` the part that missed it.  The caller
    needs the pre-split range because that whole range, not a child, is what
    re-enters the splitter worklist.
    """

    left: int
    right: int
    child_in: int
    child_out: int


class RefinablePartition:
    """Partition of the states 0..n-1 supporting only refinement.

    Attributes:
        A: the state permutation; each block is a contiguous slice of it.
        pos: inverse permutation (state -> index in A).
        block_of: state -> id of its block.
        blocks: block descriptors, indexed by block id.  Ids are never reused
            and existing ids keep designating (a shrinking part of) the same
            states, which is what lets split callers skip re-registration.

    Single-writer: callers must not mutate concurrently.  `move_count`
    accumulates element swaps across split calls so tests can bound the work.
    """

    def __init__(self, order: list[int], position: list[int], block_of: list[int],
                 blocks: list[BlockDesc]):
        self.A = order
        self.pos = position
        self.block_of = block_of
        self.blocks = blocks
        self.move_count = 0

    @classmethod
    def from_initial(cls, n: int, initial_blocks: Iterable[Iterable[int]]) -> "RefinablePartition":
        """Lay the given blocks out contiguously; they must partition 0..n-1.

        Block interiors are laid out in ascending state order so the result
        is deterministic regardless of the iteration order of the inputs.
        """
        order: list[int] = []
        block_of = [-1] * n
        blocks: list[BlockDesc] = []
        for members in initial_blocks:
            members = sorted(members)
            if not members:
                raise PartitionError("empty block")
            left = len(order)
            for q in members:
                if not 0 <= q < n:
                    raise PartitionError(f"state index {q} out of range 0..{n - 1}")
                if block_of[q] != -1:
                    raise PartitionError(f"state {q} appears in two blocks")
                block_of[q] = len(blocks)
                order.append(q)
            blocks.append(BlockDesc(left, len(order)))
        if len(order) != n:
            missing = block_of.index(-1)
            raise PartitionError(f"state {missing} is not covered by any block")
        position = [0] * n
        for i, q in enumerate(order):
            position[q] = i
        return cls(order, position, block_of, blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def copy(self) -> "RefinablePartition":
        return RefinablePartition(
            list(self.A),
            list(self.pos),
            list(self.block_of),
            [BlockDesc(b.left, b.right, b.in_splitter_union, b.marked) for b in self.blocks],
        )

    def split(self, xs: Iterable[int]) -> list[SplitRecord]:
        """Split every block that meets `xs` without being contained in it.

        The part inside `xs` ends up on the left of the block's subarray and
        gets a fresh block id; the part outside keeps the original id (and
        thus the original `in_splitter_union` flag object).  Both children
        inherit the flag value.  Duplicates in `xs` are harmless; cost is
        O(|xs|) element moves.
        """
        A, pos, block_of, blocks = self.A, self.pos, self.block_of, self.blocks
        touched: list[int] = []
        moves = 0
        for x in xs:
            b = block_of[x]
            blk = blocks[b]
            i = pos[x]
            boundary = blk.left + blk.marked
            if i < boundary:
                continue  # already marked by an earlier occurrence in xs
            if blk.marked == 0:
                touched.append(b)
            y = A[boundary]
            A[boundary] = x
            A[i] = y
            pos[x] = boundary
            pos[y] = i
            blk.marked += 1
            moves += 1
        self.move_count += moves

        records: list[SplitRecord] = []
        for b in touched:
            blk = blocks[b]
            if blk.marked == blk.size:
                blk.marked = 0  # block lies entirely inside xs: not split
                continue
            orig_left = blk.left
            mid = orig_left + blk.marked
            child = len(blocks)
            blocks.append(BlockDesc(orig_left, mid, blk.in_splitter_union))
            for i in range(orig_left, mid):
                block_of[A[i]] = child
            records.append(SplitRecord(orig_left, blk.right, child, b))
            blk.left = mid
            blk.marked = 0
        return records

    def block_members(self, b: int) -> list[int]:
        """The block's states in array order, O(size)."""
        blk = self.blocks[b]
        return self.A[blk.left : blk.right]

    def to_canonical(self) -> list[list[int]]:
        """Blocks as sorted index lists, ordered by their minimum state.

        Equal partitions produce identical output, whatever refinement steps
        led to them.
        """
        out = [sorted(self.block_members(b)) for b in range(len(self.blocks))]
        out.sort()
        return out

    def check_consistency(self) -> None:
        """Assert the structural invariants; meant for tests and debug runs."""
        n = len(self.A)
        assert sorted(self.A) == list(range(n)), "A is not a permutation"
        assert all(self.A[self.pos[q]] == q for q in range(n)), "pos is not the inverse of A"
        spans = sorted((b.left, b.right) for b in self.blocks)
        cursor = 0
        for left, right in spans:
            assert left == cursor and right > left, "blocks do not tile the array"
            cursor = right
        assert cursor == n, "blocks do not cover the array"
        for b, blk in enumerate(self.blocks):
            assert blk.marked == 0, "split cursor left dirty"
            for i in range(blk.left, blk.right):
                assert self.block_of[self.A[i]] == b, "block_of disagrees with block ranges"
