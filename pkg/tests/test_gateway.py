import pytest

from instructpipe.errors import CassetteMiss, MalformedResponse, TransportError
from instructpipe.gateway import (
    BACKOFF_BASE_S,
    BACKOFF_CAP_S,
    Cassette,
    CompletionRequest,
    Gateway,
    request_digest,
)
from tests.conftest import make_gateway


def _req(prompt="hello", model="m", temperature=0.0, max_tokens=64):
    return CompletionRequest(prompt=prompt, model=model,
                             temperature=temperature, max_tokens=max_tokens)


class TestDigest:
    def test_stable(self):
        assert _req().digest == _req().digest
        assert _req().digest == request_digest("hello", "m", 0.0, 64)

    @pytest.mark.parametrize("other", [
        _req(prompt="hello2"),
        _req(model="m2"),
        _req(temperature=0.5),
        _req(max_tokens=65),
    ])
    def test_any_field_changes_digest(self, other):
        assert other.digest != _req().digest

    def test_validation(self):
        with pytest.raises(ValueError):
            CompletionRequest(prompt="p", model="m", temperature=-1.0)
        with pytest.raises(ValueError):
            CompletionRequest(prompt="p", model="m", max_tokens=0)


class TestCassette:
    def test_roundtrip_across_instances(self, tmp_path):
        path = tmp_path / "c.jsonl"
        cassette = Cassette(path)
        req = _req()
        cassette.put(req, "answer")
        reloaded = Cassette(path)
        assert reloaded.get(req.digest) == "answer"
        assert req.digest in reloaded
        assert len(reloaded) == 1

    def test_duplicate_put_is_noop(self, tmp_path):
        path = tmp_path / "c.jsonl"
        cassette = Cassette(path)
        cassette.put(_req(), "first")
        cassette.put(_req(), "second")
        assert cassette.get(_req().digest) == "first"
        assert len(path.read_text().strip().splitlines()) == 1


class TestModes:
    def test_replay_hit(self, tmp_path):
        gw = make_gateway(lambda req: "live-text", tmp_path)
        gw.cassette.put(_req(), "canned")
        result = gw.complete(_req(), "replay")
        assert result.text == "canned"
        assert gw.network_calls == 0

    def test_replay_miss_raises(self, tmp_path):
        gw = make_gateway(lambda req: "live-text", tmp_path)
        with pytest.raises(CassetteMiss):
            gw.complete(_req(), "replay")
        assert gw.network_calls == 0

    def test_record_calls_once_then_caches(self, tmp_path):
        calls = []
        gw = make_gateway(lambda req: calls.append(req) or "fresh", tmp_path)
        assert gw.complete(_req(), "record").text == "fresh"
        assert gw.complete(_req(), "record").text == "fresh"
        assert len(calls) == 1

    def test_live_never_writes_cassette(self, tmp_path):
        gw = make_gateway(lambda req: "fresh", tmp_path)
        gw.complete(_req(), "live")
        assert len(gw.cassette) == 0

    def test_unknown_mode(self, tmp_path):
        gw = make_gateway(lambda req: "x", tmp_path)
        with pytest.raises(ValueError):
            gw.complete(_req(), "stream")


class TestRetries:
    def test_transient_then_success(self):
        attempts = []
        def flaky(req):
            attempts.append(1)
            if len(attempts) < 3:
                raise TransportError("boom")
            return "ok"
        delays = []
        gw = Gateway(transport=flaky, sleep=delays.append)
        result = gw.complete(_req(), "live")
        assert result.text == "ok"
        assert result.attempt_count == 3
        assert len(delays) == 2

    def test_exhaustion_raises_last_error(self):
        def always_throttled(req):
            raise TransportError("down")
        delays = []
        gw = Gateway(transport=always_throttled, sleep=delays.append)
        with pytest.raises(TransportError):
            gw.complete(_req(), "live")
        assert gw.network_calls == gw.max_attempts
        assert len(delays) == gw.max_attempts - 1

    def test_backoff_is_exponential_with_jitter(self):
        def fail(req):
            raise TransportError("down")
        delays = []
        gw = Gateway(transport=fail, sleep=delays.append)
        with pytest.raises(TransportError):
            gw.complete(_req(), "live")
        for i, delay in enumerate(delays):
            base = min(BACKOFF_CAP_S, BACKOFF_BASE_S * (2 ** i))
            assert 0.5 * base <= delay <= 1.5 * base

    def test_malformed_response_not_retried(self):
        calls = []
        def bad(req):
            calls.append(1)
            raise MalformedResponse("no content")
        gw = Gateway(transport=bad, sleep=lambda _: None)
        with pytest.raises(MalformedResponse):
            gw.complete(_req(), "live")
        assert len(calls) == 1


class TestBatch:
    def test_results_align_with_inputs(self, tmp_path):
        def echo(req):
            if "bad" in req.prompt:
                raise MalformedResponse("nope")
            return f"re:{req.prompt}"
        gw = make_gateway(echo, tmp_path)
        reqs = [_req(prompt=p) for p in ("a", "bad-one", "c")]
        results = gw.batch_complete(reqs, parallelism=3, mode="live")
        assert results[0].text == "re:a"
        assert isinstance(results[1], MalformedResponse)
        assert results[2].text == "re:c"

    def test_empty_batch(self, tmp_path):
        gw = make_gateway(lambda req: "x", tmp_path)
        assert gw.batch_complete([], parallelism=2, mode="live") == []

    def test_bad_parallelism(self, tmp_path):
        gw = make_gateway(lambda req: "x", tmp_path)
        with pytest.raises(ValueError):
            gw.batch_complete([_req()], parallelism=0, mode="live")
