"""Open list with both min-extraction and uniform random extraction.

A binary heap of ``(h, node_id)`` entries. The heap array holds exactly the
live entries, so it doubles as the dense index for random removal; ``node_id``
is the insertion sequence number and breaks ties FIFO.
"""

from heapq import heappop, heappush


class OpenList:
    __slots__ = ("heap",)

    def __init__(self, entries=()):
        self.heap = []
        for e in entries:
            heappush(self.heap, e)

    def __len__(self):
        return len(self.heap)

    def __bool__(self):
        return bool(self.heap)

    def push(self, h, node):
        heappush(self.heap, (h, node))

    def pop_min(self):
        return heappop(self.heap)

    def pop_random(self, rng):
        heap = self.heap
        i = rng.randrange(len(heap))
        last = heap.pop()
        if i == len(heap):
            return last
        item = heap[i]
        heap[i] = last
        if i > 0 and last < heap[(i - 1) >> 1]:
            self._sift_up(i)
        else:
            self._sift_down(i)
        return item

    def pop(self, epsilon, rng):
        """Random entry with probability ``epsilon``, otherwise the minimum.

        ``epsilon == 0`` consumes no randomness.
        """
        if epsilon > 0.0 and rng.random() < epsilon:
            return self.pop_random(rng)
        return heappop(self.heap)

    def merge_into(self, other):
        """Move every entry into ``other``; keys are preserved."""
        for e in self.heap:
            heappush(other.heap, e)
        self.heap = []

    def _sift_up(self, i):
        heap = self.heap
        item = heap[i]
        while i > 0:
            parent = (i - 1) >> 1
            if item < heap[parent]:
                heap[i] = heap[parent]
                i = parent
            else:
                break
        heap[i] = item

    def _sift_down(self, i):
        heap = self.heap
        n = len(heap)
        item = heap[i]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and heap[child + 1] < heap[child]:
                child += 1
            if heap[child] < item:
                heap[i] = heap[child]
                i = child
            else:
                break
        heap[i] = item


def pop(open_list, epsilon, rng):
    if not open_list:
        raise IndexError("pop from an empty open list")
    return open_list.pop(epsilon, rng)
