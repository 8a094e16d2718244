"""Coarsest bisimulation on a deterministic LTS by worklist refinement.

The entry point is `dbisim`: starting from an initial partition it returns
the coarsest partition that refines it and is a bisimulation, in
O(m log n) time and O(k + m + n) space.  The worklist holds splitter ranges
over the partition's state array; each iteration detaches one block from a
range and scans the incoming transitions of the *smaller* side, which is
what caps the number of times any single transition is scanned at
floor(log2 n) + 1.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lts import NormalizedDlts
from .partition import RefinablePartition

DEBUG_ENV = "DLTS_BISIM_DEBUG"

# The brute-force invariant assertions are quadratic-ish; above this size they
# would dominate the run without telling us anything new.
_DEBUG_ASSERT_MAX_N = 512


@dataclass
class ScanStats:
    """Work counters for one refinement run.

    `transitions_scanned` counts every visit of an incoming transition during
    splitter-side scans.  `per_transition_counts`, when allocated, tracks the
    same per transition index; each entry stays <= floor(log2 n) + 1 because
    a state's enclosing splitter side at least halves between visits.
    """

    transitions_scanned: int = 0
    split_calls: int = 0
    blocks_final: int = 0
    per_transition_counts: list[int] | None = None

    @classmethod
    def detailed(cls, m: int) -> "ScanStats":
        return cls(per_transition_counts=[0] * m)


class SplitterSet:
    """LIFO worklist of pending splitter ranges over the partition array.

    Every entry is a [left, right) range spanning at least two whole blocks;
    entries are pairwise disjoint.  Ranges stay valid while blocks inside
    them split, because splitting permutes states only within block bounds.
    """

    def __init__(self) -> None:
        self.entries: list[list[int]] = []

    def push(self, left: int, right: int) -> None:
        self.entries.append([left, right])

    def __len__(self) -> int:
        return len(self.entries)


class LetterBuckets:
    """Per-letter source buckets filled while scanning one splitter side.

    Only buckets whose letter was actually touched are reset afterwards, so a
    refinement step costs nothing for the rest of the alphabet.
    """

    def __init__(self, k: int) -> None:
        self.buckets: list[list[int]] = [[] for _ in range(k)]
        self.touched: list[int] = []

    def add(self, letter: int, state: int) -> None:
        bucket = self.buckets[letter]
        if not bucket:
            self.touched.append(letter)
        bucket.append(state)

    def clear_touched(self) -> None:
        for a in self.touched:
            self.buckets[a].clear()
        self.touched.clear()

    def is_clean(self) -> bool:
        return not self.touched and all(not b for b in self.buckets)


def init_refine(T: NormalizedDlts, p_init: RefinablePartition) -> RefinablePartition:
    """Pre-refinement: separate states whose outgoing letter sets differ.

    Returns a refined copy; `p_init` is not modified.  Afterwards, two states
    share a block iff they shared one before and, for every letter, either
    both or neither has an outgoing transition on it.  This property is what
    allows the main loop's splitters to be letter-free.
    """
    p = p_init.copy()
    sources: list[list[int]] = [[] for _ in range(T.k)]
    for src, a, _dst in T.transitions:
        sources[a].append(src)
    for xs in sources:
        p.split(xs)
    return p


def select_block(entry: Sequence[int], p: RefinablePartition) -> int:
    """The block at the left edge of a splitter range, O(1).

    Always taking the leftmost block keeps the remainder of the range
    contiguous.  The range must span at least two whole blocks.
    """
    left, right = entry
    b = p.block_of[p.A[left]]
    blk = p.blocks[b]
    assert blk.left == left and blk.right < right, "splitter range must span >= 2 whole blocks"
    return b


def collect_smaller_preimages(
    smaller_states: Iterable[int],
    T: NormalizedDlts,
    buckets: LetterBuckets,
    stats: ScanStats | None = None,
) -> None:
    """Distribute the incoming transitions of the scanned states by letter.

    Each source lands in its letter's bucket; a state appears at most once
    per bucket because the LTS is deterministic.  Every transition visited
    here is one unit of the algorithm's total work.
    """
    in_off = T.in_offsets
    trans = T.transitions
    counts = stats.per_transition_counts if stats is not None else None
    scanned = 0
    for q1 in smaller_states:
        for t in range(in_off[q1], in_off[q1 + 1]):
            src, a, _dst = trans[t]
            buckets.add(a, src)
            if counts is not None:
                counts[t] += 1
            scanned += 1
    if stats is not None:
        stats.transitions_scanned += scanned


def dbisim(
    T: NormalizedDlts,
    p_init: RefinablePartition,
    stats: ScanStats | None = None,
    *,
    debug: bool | None = None,
    _scan_larger: bool = False,
) -> RefinablePartition:
    """Coarsest bisimulation over `T` refining `p_init`, as a new partition.

    `p_init` is left untouched.  Counters accumulate into `stats` when given.
    `debug` (default: the DLTS_BISIM_DEBUG environment variable) enables the
    internal invariant assertions on small inputs and allocates per-transition
    counters on a given `stats`.  `_scan_larger` deliberately scans the larger
    splitter side instead of the smaller one; the result is still correct but
    the log-factor scan bound no longer holds — it exists so tests can show
    the bound really depends on the smaller-half rule.
    """
    if debug is None:
        debug = os.environ.get(DEBUG_ENV, "") == "1"
    if debug and stats is not None and stats.per_transition_counts is None:
        stats.per_transition_counts = [0] * T.m

    p = init_refine(T, p_init)
    if p.block_count <= 1:
        if stats is not None:
            stats.blocks_final = p.block_count
        return p

    checker = _InvariantChecker(T, p_init) if debug and T.n <= _DEBUG_ASSERT_MAX_N else None

    worklist = SplitterSet()
    worklist.push(0, T.n)
    for blk in p.blocks:
        blk.in_splitter_union = True  # every block sits inside the initial full range
    buckets = LetterBuckets(T.k)
    A, block_of, blocks = p.A, p.block_of, p.blocks

    while worklist.entries:
        if checker is not None:
            assert buckets.is_clean(), "letter buckets dirty at loop head"
            checker.check(p, worklist)

        entry = worklist.entries[-1]
        left, right = entry
        b = select_block(entry, p)
        b_right = blocks[b].right
        nxt = block_of[A[b_right]]
        if blocks[nxt].right == right:
            # Exactly two blocks: the entry is spent, both blocks leave the
            # splitter union (they may re-enter later, once split).
            worklist.entries.pop()
            blocks[nxt].in_splitter_union = False
        else:
            entry[0] = b_right  # detach the chosen block, keep the rest pending
        blocks[b].in_splitter_union = False

        size_b = b_right - left
        take_b = size_b <= right - b_right
        if _scan_larger:
            take_b = not take_b
        lo, hi = (left, b_right) if take_b else (b_right, right)
        collect_smaller_preimages(A[lo:hi], T, buckets, stats)

        for a in buckets.touched:
            records = p.split(buckets.buckets[a])
            if stats is not None:
                stats.split_calls += 1
            for rec in records:
                # child_out kept the pre-split block's id, hence its flag.
                if not blocks[rec.child_out].in_splitter_union:
                    # The pre-split range re-enters the worklist as one piece:
                    # it now spans (at least) the two children.
                    worklist.push(rec.left, rec.right)
                    blocks[rec.child_in].in_splitter_union = True
                    blocks[rec.child_out].in_splitter_union = True
        buckets.clear_touched()

    if checker is not None:
        assert buckets.is_clean(), "letter buckets dirty after the loop"
        checker.check(p, worklist)
    if stats is not None:
        stats.blocks_final = p.block_count
    return p


class _InvariantChecker:
    """Brute-force assertions over the loop state, for debug runs on small inputs.

    Checks, at every loop head and once after the loop:
      * worklist entries are disjoint and each is a union of >= 2 whole
        blocks, and the per-block flags mirror membership in their union;
      * the current partition is still refined by the coarsest bisimulation
        inside the initial partition (hence contains every bisimulation
        inside it);
      * every worklist range, and every block outside the worklist union, has
        a preimage under each letter that is a union of whole blocks.
    """

    def __init__(self, T: NormalizedDlts, p_init: RefinablePartition):
        from .oracle import naive_fixpoint  # debug-only dependency

        self.T = T
        init_blocks = [set(p_init.block_members(b)) for b in range(p_init.block_count)]
        self.coarsest = naive_fixpoint(T, init_blocks)
        pre: list[list[tuple[int, int]]] = [[] for _ in range(T.k)]
        for src, a, dst in T.transitions:
            pre[a].append((src, dst))
        self.pre = pre

    def check(self, p: RefinablePartition, worklist: SplitterSet) -> None:
        self._check_worklist_shape(p, worklist)
        self._check_contains_all_bisimulations(p)
        self._check_stability(p, worklist)

    def _check_worklist_shape(self, p: RefinablePartition, worklist: SplitterSet) -> None:
        in_union = [False] * len(p.A)
        previous_right = None
        for left, right in sorted(tuple(e) for e in worklist.entries):
            assert previous_right is None or left >= previous_right, "worklist ranges overlap"
            previous_right = right
            cursor = left
            spanned = 0
            while cursor < right:
                blk = p.blocks[p.block_of[p.A[cursor]]]
                assert blk.left == cursor, "worklist range cuts through a block"
                cursor = blk.right
                spanned += 1
            assert cursor == right, "worklist range cuts through a block"
            assert spanned >= 2, "worklist range spans fewer than two blocks"
            for i in range(left, right):
                in_union[i] = True
        for b, blk in enumerate(p.blocks):
            expected = blk.left < len(in_union) and in_union[blk.left]
            assert blk.in_splitter_union == expected, f"flag of block {b} out of sync"

    def _check_contains_all_bisimulations(self, p: RefinablePartition) -> None:
        # The coarsest bisimulation inside the initial partition contains
        # every other one, so containment of its blocks is containment of all.
        for block in self.coarsest:
            ids = {p.block_of[q] for q in block}
            assert len(ids) == 1, "partition separated two bisimilar states"

    def _check_stability(self, p: RefinablePartition, worklist: SplitterSet) -> None:
        regions: list[set[int]] = [set(p.A[l:r]) for l, r in worklist.entries]
        regions.extend(
            set(p.block_members(b))
            for b, blk in enumerate(p.blocks)
            if not blk.in_splitter_union
        )
        for region in regions:
            for a in range(self.T.k):
                pre_a = {src for src, dst in self.pre[a] if dst in region}
                hit_blocks = {p.block_of[q] for q in pre_a}
                for b in hit_blocks:
                    assert set(p.block_members(b)) <= pre_a, (
                        "a letter preimage of a pending splitter cuts a block"
                    )
