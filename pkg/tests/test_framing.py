import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proofbench.protocol.framing import (
    BLOCK_THRESHOLD,
    FrameDecoder,
    FramingError,
    REPLY_TAGS,
    encode_frame,
    encode_reply,
)

json_scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-(2**31), max_value=2**31),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=40),
)
json_values = st.recursive(
    json_scalars,
    lambda inner: st.one_of(
        st.lists(inner, max_size=4), st.dictionaries(st.text(max_size=8), inner, max_size=4)
    ),
    max_leaves=12,
)


def decode_bytes(data: bytes, allowed=None):
    decoder = FrameDecoder(allowed)
    frames = decoder.feed(data)
    decoder.finish()
    return frames


def test_encode_command_is_one_line():
    raw = encode_frame("use_theories", {"session_id": "s1", "theories": ["A"]})
    assert raw.startswith(b"use_theories ")
    assert raw.endswith(b"\n")
    assert raw.count(b"\n") == 1


@given(payload=json_values)
@settings(max_examples=300, deadline=None)
def test_command_round_trip(payload):
    frames = decode_bytes(encode_frame("cmd", payload))
    assert len(frames) == 1
    head, decoded = frames[0]
    assert head == "cmd"
    assert decoded == json.loads(json.dumps(payload))


@given(payload=json_values, tag=st.sampled_from(sorted(REPLY_TAGS)))
@settings(max_examples=300, deadline=None)
def test_reply_round_trip_both_framings(payload, tag):
    for threshold in (0, BLOCK_THRESHOLD):  # force block and line forms
        frames = decode_bytes(encode_reply(tag, payload, block_threshold=threshold), REPLY_TAGS)
        assert frames == [(tag, json.loads(json.dumps(payload)))]


def test_small_reply_is_line_large_is_block():
    small = encode_reply("OK", {"a": 1})
    assert small == b'OK {"a":1}\n'
    big_payload = {"text": "x" * 5000}
    big = encode_reply("NOTE", big_payload)
    count, _, rest = big.partition(b"\n")
    assert count.isdigit()
    assert len(rest) == int(count)
    assert decode_bytes(big, REPLY_TAGS) == [("NOTE", big_payload)]


def test_block_split_across_reads():
    body = b"NOTE " + json.dumps({"task_id": "t", "message": "m" * 200}).encode()
    stream = str(len(body)).encode() + b"\n" + body
    decoder = FrameDecoder(REPLY_TAGS)
    assert decoder.feed(stream[:3]) == []
    assert decoder.feed(stream[3:10]) == []
    frames = decoder.feed(stream[10:])
    assert len(frames) == 1 and frames[0][0] == "NOTE"
    decoder.finish()


def test_truncated_block_is_framing_error():
    decoder = FrameDecoder(REPLY_TAGS)
    assert decoder.feed(b"7\nabc") == []
    with pytest.raises(FramingError):
        decoder.finish()


def test_unknown_tag_is_framing_error():
    with pytest.raises(FramingError):
        decode_bytes(b"BOGUS {}\n", REPLY_TAGS)


def test_garbage_payload_is_framing_error():
    with pytest.raises(FramingError):
        decode_bytes(b"OK {not-json}\n", REPLY_TAGS)


def test_heads_may_not_be_numeric():
    with pytest.raises(FramingError):
        encode_frame("123", {})


def test_multiple_frames_in_one_read():
    data = encode_reply("OK", {"n": 1}) + encode_reply("NOTE", {"task_id": "t"}) + encode_reply(
        "FINISHED", {"task_id": "t", "messages": []}
    )
    frames = decode_bytes(data, REPLY_TAGS)
    assert [f[0] for f in frames] == ["OK", "NOTE", "FINISHED"]


@given(data=st.binary(max_size=200))
@settings(max_examples=200, deadline=None)
def test_decoder_never_hangs_or_crashes_unexpectedly(data):
    decoder = FrameDecoder()
    try:
        decoder.feed(data)
        decoder.finish()
    except FramingError:
        pass  # rejecting garbage is fine; looping or other errors are not
