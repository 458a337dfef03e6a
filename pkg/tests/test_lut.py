import random

import pytest

from fifosim.lut import LookupTable


def test_empty_lookup():
    assert LookupTable(4).lookup(5) is None


def test_insert_lookup_roundtrip():
    lut = LookupTable(4, bits=2)
    h = lut.insert(5)
    assert lut.lookup(5) == h
    # 5 and 9 share bucket 1 with 2 bucket bits; 6 is an empty neighbour.
    assert lut.lookup(6) is None
    assert lut.lookup(9) is None
    assert lut.presence[h] == 0


def test_fig2_style_tag():
    lut = LookupTable(8)
    h = lut.insert(0b1101100)
    assert lut.tag(h) == 0b1101100
    assert lut.present_configs(h) == []


def test_duplicate_insert_rejected():
    lut = LookupTable(2)
    lut.insert(3)
    with pytest.raises(ValueError):
        lut.insert(3)


def test_bucket_collisions():
    lut = LookupTable(1, bits=10)
    blocks = [7 + (k << 10) for k in range(300)]
    random.Random(0).shuffle(blocks)
    handles = {b: lut.insert(b) for b in blocks}
    assert max(lut.bucket_sizes()) == 300
    for b, h in handles.items():
        assert lut.lookup(b) == h
    lut.check_invariants()


def test_random_against_dict_oracle():
    rnd = random.Random(42)
    lut = LookupTable(70, bits=6)
    oracle: dict[int, int] = {}
    for _ in range(10_000):
        b = rnd.randrange(1 << 20) if rnd.random() < 0.6 else rnd.choice(list(oracle) or [0])
        got = lut.lookup(b)
        if b in oracle:
            assert got == oracle[b]
        else:
            assert got is None
            oracle[b] = lut.insert(b)
    assert len(lut) == len(oracle)
    for b, h in oracle.items():
        assert lut.lookup(b) == h
        assert lut.tag(h) == b
    lut.check_invariants()


def test_set_presence():
    lut = LookupTable(100)
    x, y = lut.insert(1), lut.insert(2)
    lut.set_presence(x, 3, True)
    assert lut.present_configs(x) == [3]
    lut.set_presence(x, 3, True)
    assert lut.present_configs(x) == [3]
    lut.set_presence(x, 99, True)
    assert lut.is_present(x, 99) and not lut.is_present(x, 98)
    lut.set_presence(x, 99, False)
    lut.set_presence(x, 3, False)
    assert lut.presence[x] == 0
    assert lut.presence[y] == 0
    with pytest.raises(IndexError):
        lut.set_presence(x, 100, True)
    with pytest.raises(IndexError):
        lut.set_presence(7, 0, True)


def test_handles_stable_across_inserts():
    lut = LookupTable(1, bits=0)
    first = lut.insert(500)
    for b in range(500):
        lut.insert(b)
    assert lut.lookup(500) == first
    assert lut.tag(first) == 500
