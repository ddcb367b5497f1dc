"""Order maintenance: a totally ordered collection supporting O(1) amortized
insert-before/after and O(1) comparison.

Two-level list labeling: a doubly linked list of buckets carrying integer
tags, each holding a small doubly linked run of elements with local integer
tags. Global order is (bucket tag, local tag) lexicographic. When a bucket
fills it splits; when adjacent bucket tags leave no gap, a doubling window of
following buckets is respaced evenly (the amortized list-labeling step).

Elements stay allocated after deletion but refuse further operations, so stale
handles fail loudly.
"""

from __future__ import annotations

from typing import Optional

BUCKET_CAP = 64
LOCAL_SPACING = 1 << 20
LOCAL_LIMIT = 1 << 60
TOP_SPACING = 1 << 24
TOP_LIMIT = 1 << 62

LESS = -1
EQUAL = 0
GREATER = 1


class DeadElement(RuntimeError):
    pass


class OrderMismatch(RuntimeError):
    pass


class OmElement:
    __slots__ = ("bucket", "local", "prev", "next", "alive")

    def __init__(self, bucket, local):
        self.bucket = bucket
        self.local = local
        self.prev: Optional[OmElement] = None
        self.next: Optional[OmElement] = None
        self.alive = True

    def sort_key(self) -> tuple[int, int]:
        """Integer snapshot of the element's position. Snapshots taken between
        relabelings of the structure are mutually consistent; callers that
        store them long-term accept slight reordering across relabels."""
        return (self.bucket.tag, self.local)

    def __repr__(self):
        state = "" if self.alive else " dead"
        return f"<om {self.bucket.tag}:{self.local}{state}>"


class _Bucket:
    __slots__ = ("order", "tag", "prev", "next", "head", "tail", "count")

    def __init__(self, order, tag):
        self.order = order
        self.tag = tag
        self.prev: Optional[_Bucket] = None
        self.next: Optional[_Bucket] = None
        self.head: Optional[OmElement] = None
        self.tail: Optional[OmElement] = None
        self.count = 0


class OmOrder:
    def __init__(self):
        self.first: Optional[_Bucket] = None
        self.size = 0

    # -- queries ----------------------------------------------------------

    def compare(self, a: OmElement, b: OmElement) -> int:
        if not (a.alive and b.alive):
            raise DeadElement("comparison against a deleted element")
        if a.bucket.order is not self or b.bucket.order is not self:
            raise OrderMismatch("elements belong to different orders")
        if a is b:
            return EQUAL
        ka = (a.bucket.tag, a.local)
        kb = (b.bucket.tag, b.local)
        return LESS if ka < kb else GREATER

    def less(self, a: OmElement, b: OmElement) -> bool:
        return self.compare(a, b) == LESS

    # -- construction ------------------------------------------------------

    def insert_first(self) -> OmElement:
        """Add the anchor element of an empty order."""
        if self.first is not None:
            raise RuntimeError("order is not empty")
        b = _Bucket(self, TOP_LIMIT // 2)
        e = OmElement(b, LOCAL_LIMIT // 2)
        b.head = b.tail = e
        b.count = 1
        self.first = b
        self.size = 1
        return e

    def insert_after(self, e: OmElement) -> OmElement:
        self._check_live(e)
        b = e.bucket
        if b.count >= BUCKET_CAP:
            self._split_bucket(b)
            b = e.bucket
        nxt = e.next
        if nxt is None:
            local = e.local + LOCAL_SPACING
            if local >= LOCAL_LIMIT:
                self._respace_bucket(b)
                return self.insert_after(e)
        else:
            if nxt.local - e.local < 2:
                self._respace_bucket(b)
                return self.insert_after(e)
            local = e.local + (nxt.local - e.local) // 2
        new = OmElement(b, local)
        new.prev = e
        new.next = nxt
        e.next = new
        if nxt is None:
            b.tail = new
        else:
            nxt.prev = new
        b.count += 1
        self.size += 1
        return new

    def insert_before(self, e: OmElement) -> OmElement:
        self._check_live(e)
        b = e.bucket
        if b.count >= BUCKET_CAP:
            self._split_bucket(b)
            b = e.bucket
        prv = e.prev
        if prv is None:
            local = e.local - LOCAL_SPACING
            if local <= 0:
                self._respace_bucket(b)
                return self.insert_before(e)
        else:
            if e.local - prv.local < 2:
                self._respace_bucket(b)
                return self.insert_before(e)
            local = prv.local + (e.local - prv.local) // 2
        new = OmElement(b, local)
        new.prev = prv
        new.next = e
        e.prev = new
        if prv is None:
            b.head = new
        else:
            prv.next = new
        b.count += 1
        self.size += 1
        return new

    def delete(self, e: OmElement) -> None:
        self._check_live(e)
        b = e.bucket
        if e.prev is None:
            b.head = e.next
        else:
            e.prev.next = e.next
        if e.next is None:
            b.tail = e.prev
        else:
            e.next.prev = e.prev
        b.count -= 1
        e.alive = False
        e.prev = e.next = None
        self.size -= 1
        if b.count == 0:
            self._unlink_bucket(b)

    # -- internals ----------------------------------------------------------

    def _check_live(self, e: OmElement) -> None:
        if not e.alive:
            raise DeadElement("operation on a deleted element")
        if e.bucket.order is not self:
            raise OrderMismatch("element belongs to a different order")

    def _unlink_bucket(self, b: _Bucket) -> None:
        if b.prev is None:
            self.first = b.next
        else:
            b.prev.next = b.next
        if b.next is not None:
            b.next.prev = b.prev

    def _respace_bucket(self, b: _Bucket) -> None:
        # spread across the whole local range so both ends keep headroom
        stride = LOCAL_LIMIT // (b.count + 1)
        local = stride
        e = b.head
        while e is not None:
            e.local = local
            local += stride
            e = e.next

    def _split_bucket(self, b: _Bucket) -> None:
        """Move the second half of b into a fresh bucket directly after it."""
        tag = self._tag_after(b)
        nb = _Bucket(b.order, tag)
        nb.prev = b
        nb.next = b.next
        if b.next is not None:
            b.next.prev = nb
        b.next = nb
        # walk to the split point
        keep = b.count // 2
        e = b.head
        for _ in range(keep - 1):
            e = e.next
        nb.head = e.next
        nb.head.prev = None
        nb.tail = b.tail
        b.tail = e
        e.next = None
        nb.count = b.count - keep
        b.count = keep
        cursor = nb.head
        while cursor is not None:
            cursor.bucket = nb
            cursor = cursor.next
        self._respace_bucket(b)
        self._respace_bucket(nb)

    def _tag_after(self, b: _Bucket) -> int:
        nxt = b.next
        if nxt is None:
            if b.tag + 2 < TOP_LIMIT:
                return b.tag + min(TOP_SPACING, (TOP_LIMIT - b.tag) // 2)
        elif nxt.tag - b.tag >= 2:
            return b.tag + (nxt.tag - b.tag) // 2
        self._make_top_gap(b)
        return self._tag_after(b)

    def _make_top_gap(self, b: _Bucket) -> None:
        """Respace a doubling window of buckets after b until a tag gap opens."""
        window = 2
        while True:
            buckets = []
            cursor = b.next
            while cursor is not None and len(buckets) < window:
                buckets.append(cursor)
                cursor = cursor.next
            hi = TOP_LIMIT if cursor is None else cursor.tag
            stride = (hi - b.tag) // (len(buckets) + 1)
            if stride >= 2 and buckets:
                tag = b.tag
                for bk in buckets:
                    tag += stride
                    bk.tag = tag
                return
            if cursor is None:
                # the window already covers everything after b and the tail of
                # the tag space is too dense; respace the whole list
                self._respace_all()
                return
            window *= 2

    def _respace_all(self) -> None:
        count = 0
        cursor = self.first
        while cursor is not None:
            count += 1
            cursor = cursor.next
        stride = max(2, TOP_LIMIT // (count + 2))
        tag = 0
        cursor = self.first
        while cursor is not None:
            tag += stride
            cursor.tag = tag
            cursor = cursor.next

    # -- debug helpers -------------------------------------------------------

    def elements(self):
        b = self.first
        while b is not None:
            e = b.head
            while e is not None:
                yield e
                e = e.next
            b = b.next

    def check_invariants(self) -> None:
        prev_tag = None
        b = self.first
        total = 0
        while b is not None:
            assert b.count > 0
            assert prev_tag is None or b.tag > prev_tag, "bucket tags must increase"
            prev_tag = b.tag
            e = b.head
            prev_local = None
            n = 0
            while e is not None:
                assert e.bucket is b
                assert prev_local is None or e.local > prev_local, "local tags must increase"
                prev_local = e.local
                n += 1
                e = e.next
            assert n == b.count
            total += n
            b = b.next
        assert total == self.size


def om_create() -> tuple[OmOrder, OmElement]:
    order = OmOrder()
    return order, order.insert_first()


def om_insert_after(e: OmElement) -> OmElement:
    return e.bucket.order.insert_after(e)


def om_insert_before(e: OmElement) -> OmElement:
    return e.bucket.order.insert_before(e)


def om_compare(e1: OmElement, e2: OmElement) -> int:
    if not (e1.alive and e2.alive):
        raise DeadElement("comparison against a deleted element")
    return e1.bucket.order.compare(e1, e2)


def om_delete(e: OmElement) -> None:
    if not e.alive:
        raise DeadElement("element already deleted")
    e.bucket.order.delete(e)
