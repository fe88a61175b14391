"""Acceptance suite: one test per platform-level criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass line per
criterion. Every tolerance is pinned here; stub adapters stand in for the
remote model servers throughout.
"""

import json
import math
import os
import random
import signal
import socket
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timedelta, timezone

import httpx
import numpy as np
import pytest
from fastapi.testclient import TestClient

from fakefinder.config import AppConfig
from fakefinder.detectors import (
    build_default_registry,
    high_frequency_ratio,
    mean_spectral_flatness,
    run_frequency_detector,
    spectral_flatness_frames,
)
from fakefinder.detectors.native import HF_RADIAL_CUTOFF
from fakefinder.errors import ERROR_STATUS, ServiceError
from fakefinder.analytics import AnalyticsService
from fakefinder.gateway import build_services, create_app
from fakefinder.ingest import DecodedImage, MediaFormat, sniff_format
from fakefinder.persistence import Database

from conftest import make_config, register_user
from corpus import (
    adversarial_corpus,
    checkerboard,
    make_avif,
    make_wav,
    noise_samples,
    sine_samples,
    solid_png,
    valid_corpus,
)
from dbfill import insert_population
from oracles import (
    oracle_frame_flatness,
    oracle_high_frequency_ratio,
    oracle_parseval_sides,
    recount_statistics,
    replay_ledger,
)
from stubs import UNREACHABLE_URL, StubAdapterServer


def report(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}")


def _incompressible_png() -> bytes:
    from corpus import make_png

    rng = np.random.default_rng(31337)
    return make_png(rng.integers(0, 256, (64, 64, 3)).astype(np.uint8))


# ---------------------------------------------------------------------------
# 1. Ledger suite
# ---------------------------------------------------------------------------


def test_criterion_ledger_suite(tmp_path):
    started = time.monotonic()
    services = build_services(make_config(tmp_path))
    accounts = services.accounts
    admin = register_user(services, email="admin@example.org", name="Admin")

    def run_sequence(i: int) -> str:
        rng = random.Random(1000 + i)
        user = accounts.register(
            f"User {i}", f"ledger{i}@example.org", "x", "US",
            "hunter2abc1", "hunter2abc1",
        )
        open_charges: list[str] = []
        for _ in range(rng.randint(2, 6)):
            op = rng.random()
            if op < 0.55:
                try:
                    entry = accounts.charge_credit(user.user_id, ref="seq")
                    open_charges.append(entry.entry_id)
                except ServiceError as err:
                    assert err.code == "insufficient_credits"
            elif op < 0.8 and open_charges:
                accounts.refund_credit(user.user_id, open_charges.pop(0))
            else:
                accounts.grant_credits(admin.user_id, user.user_id, rng.randint(1, 5), "seq")
        return user.user_id

    with ThreadPoolExecutor(max_workers=8) as pool:
        user_ids = list(pool.map(run_sequence, range(1000)))

    for user_id in user_ids + [admin.user_id]:
        rows = services.db.query(
            "SELECT * FROM credits WHERE user_id = :u ORDER BY seq", {"u": user_id}
        )
        balance = replay_ledger(rows)
        assert balance == accounts.get_balance(user_id)

    # 40 concurrent charges against a fresh balance of 20
    contended = register_user(services, email="contended@example.org")

    def attempt(i: int) -> int:
        try:
            accounts.charge_credit(contended.user_id, ref=f"c{i}")
            return 1
        except ServiceError as err:
            assert err.code == "insufficient_credits"
            return 0

    with ThreadPoolExecutor(max_workers=8) as pool:
        successes = sum(pool.map(attempt, range(40)))
    assert successes == 20
    assert accounts.get_balance(contended.user_id) == 0
    replay_ledger(
        services.db.query(
            "SELECT * FROM credits WHERE user_id = :u ORDER BY seq",
            {"u": contended.user_id},
        )
    )

    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"ledger suite took {elapsed:.1f}s"
    services.db.close()
    report(f"ledger suite (1000 sequences, 8 workers, 40-way contention) in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. Accounting end-to-end
# ---------------------------------------------------------------------------


def test_criterion_accounting_end_to_end(tmp_path):
    started = time.monotonic()
    services = build_services(make_config(tmp_path))
    stub = StubAdapterServer()
    for det in ("xception", "pg-fdd", "audio-cnn"):
        services.remote.adapter_urls[det] = stub.url

    rng = random.Random(4242)
    plan_lock = __import__("threading").Lock()
    fail_plan: list[bool] = []

    def behavior(path, body):
        with plan_lock:
            fails = fail_plan.pop(0) if fail_plan else False
        if fails:
            return 500, {"error": "injected failure"}
        return 200, {"label": "fake", "score": 0.91, "latency_ms": 3}

    stub.behavior = behavior

    users = [
        register_user(services, email=f"acct{i}@example.org") for i in range(6)
    ]
    uploads = {}
    avif_uploads = {}
    audio_uploads = {}
    for u in users:
        uploads[u.user_id] = services.ingest.ingest(
            u.user_id, "c.png", solid_png(8, 8, 90), True
        )
        avif_uploads[u.user_id] = services.ingest.ingest(u.user_id, "a.avif", make_avif(), True)
        audio_uploads[u.user_id] = services.ingest.ingest(
            u.user_id, "n.wav", make_wav(noise_samples(2048, seed=8)), True
        )

    successes = {u.user_id: 0 for u in users}
    attempts = 0
    jobs = []
    for u in users:
        for _ in range(rng.randint(8, 14)):
            kind = rng.random()
            if kind < 0.5:
                will_fail = rng.random() < 0.3
                jobs.append((u.user_id, "remote", will_fail))
            elif kind < 0.8:
                jobs.append((u.user_id, "native", False))
            elif kind < 0.9:
                jobs.append((u.user_id, "native-audio", False))
            else:
                jobs.append((u.user_id, "avif", True))
    rng.shuffle(jobs)

    def run_job(job):
        user_id, kind, will_fail = job
        if kind == "remote":
            with plan_lock:
                fail_plan.append(will_fail)
            try:
                services.orchestrator.run_inference(
                    user_id, uploads[user_id].upload_id, "xception"
                )
                return (user_id, True)
            except ServiceError:
                return (user_id, False)
        if kind == "native":
            services.orchestrator.run_inference(
                user_id, uploads[user_id].upload_id, "freq-heuristic-v1"
            )
            return (user_id, True)
        if kind == "native-audio":
            services.orchestrator.run_inference(
                user_id, audio_uploads[user_id].upload_id, "audio-flatness-v1"
            )
            return (user_id, True)
        try:
            services.orchestrator.run_inference(
                user_id, avif_uploads[user_id].upload_id, "freq-heuristic-v1"
            )
            raise AssertionError("avif cannot decode natively")
        except ServiceError as err:
            assert err.code == "undecodable_format"
            return (user_id, False)

    # Remote jobs consume the shared fail plan in order, so run serially per
    # plan entry; natives can run alongside. Simplest faithful approach: one
    # worker pool, plan appended under the lock right before dispatch.
    with ThreadPoolExecutor(max_workers=4) as pool:
        outcomes = list(pool.map(run_job, jobs))
    for user_id, ok in outcomes:
        if ok:
            successes[user_id] += 1
    attempts = len(jobs)

    for u in users:
        assert services.accounts.get_balance(u.user_id) == 20 - successes[u.user_id], u.email
        rows = services.db.query(
            "SELECT * FROM credits WHERE user_id = :u ORDER BY seq", {"u": u.user_id}
        )
        assert replay_ledger(rows) == 20 - successes[u.user_id]

    log_count = services.db.scalar("SELECT COUNT(*) FROM model_logs")
    assert log_count == attempts
    prediction_count = services.db.scalar("SELECT COUNT(*) FROM predictions")
    assert prediction_count == sum(successes.values())

    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"accounting workload took {elapsed:.1f}s"
    stub.close()
    services.db.close()
    report(
        f"accounting end-to-end ({attempts} attempts, {sum(successes.values())} successes,"
        f" 30% stub failures) in {elapsed:.1f}s"
    )


# ---------------------------------------------------------------------------
# 3. Format corpus
# ---------------------------------------------------------------------------


def test_criterion_format_corpus():
    corpus = valid_corpus()
    assert set(corpus) == {"png", "jpeg", "avif", "wav", "mp3"}
    for fmt_name, files in corpus.items():
        assert len(files) >= 3
        for data in files:
            assert sniff_format(data) is MediaFormat(fmt_name)

    hostile = adversarial_corpus()
    assert len(hostile) == 20
    for description, data, expected in hostile:
        if expected is None:
            with pytest.raises(ServiceError) as err:
                sniff_format(data)
            assert err.value.code == "unsupported_format", description
        else:
            assert sniff_format(data) is MediaFormat(expected), description
    report("format corpus (15 valid files, 20 adversarial files)")


# ---------------------------------------------------------------------------
# 4. Native frequency detector oracle
# ---------------------------------------------------------------------------


def test_criterion_frequency_detector_oracle():
    started = time.monotonic()

    constant = DecodedImage(width=8, height=8, luma=np.full((8, 8), 0.5))
    expected_constant = 1.0 / (1.0 + math.exp(5.0))
    assert run_frequency_detector(constant).score == pytest.approx(expected_constant, abs=1e-9)

    board = DecodedImage(width=8, height=8, luma=checkerboard(8).astype(np.float64) / 255.0)
    expected_board = 1.0 / (1.0 + math.exp(-5.0))
    assert run_frequency_detector(board).score == pytest.approx(expected_board, abs=1e-9)

    rng = np.random.default_rng(20260101)
    for _ in range(25):
        height = int(rng.integers(1, 33))
        width = int(rng.integers(1, 33))
        luma = rng.random((height, width))
        ours = high_frequency_ratio(luma)
        reference = oracle_high_frequency_ratio(luma, HF_RADIAL_CUTOFF)
        if reference == 0.0:
            assert ours == 0.0
        else:
            assert abs(ours - reference) / reference < 1e-9
        lhs, rhs = oracle_parseval_sides(luma)
        assert abs(lhs - rhs) / rhs < 1e-9
        fast_lhs = float((np.abs(np.fft.fft2(luma)) ** 2).sum() / luma.size)
        assert abs(fast_lhs - rhs) / rhs < 1e-9

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"frequency oracle took {elapsed:.1f}s"
    report(f"native frequency detector oracle (25 random images, O(N^4) DFT) in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 5. Native audio detector oracle
# ---------------------------------------------------------------------------


def test_criterion_audio_detector_oracle():
    started = time.monotonic()

    silence = np.zeros(16000)
    frames = spectral_flatness_frames(silence)
    assert np.all(frames == 1.0), "silence flatness must be exactly 1 under the eps convention"
    assert mean_spectral_flatness(silence) == 1.0

    sine = sine_samples(440, 16000, 1.0)
    assert mean_spectral_flatness(sine) < 0.05

    noise = noise_samples(16000, seed=1234)
    assert mean_spectral_flatness(noise) > 0.5

    for samples in (sine, noise, np.concatenate([np.zeros(2048), sine[:4096]])):
        ours = spectral_flatness_frames(samples)
        reference = oracle_frame_flatness(samples)
        assert len(ours) == len(reference)
        for a, b in zip(ours, reference):
            assert a == pytest.approx(b, rel=1e-9, abs=1e-9)

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"audio oracle took {elapsed:.1f}s"
    report(f"native audio detector oracle (silence/sine/noise + frame recheck) in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 6. Statistics oracle
# ---------------------------------------------------------------------------


def test_criterion_statistics_oracle(tmp_path):
    rng = random.Random(9)
    registry = build_default_registry()
    for round_no in range(50):
        db = Database("sqlite:///:memory:")
        db.migrate()
        analytics = AnalyticsService(db, registry, AppConfig(token_key="k"))
        users, predictions = insert_population(
            db, rng.randint(1, 100), rng.randint(0, 1000), seed=3000 + round_no
        )
        snapshot = analytics.compute_statistics().to_dict()
        expected = recount_statistics(users, predictions)
        for key, value in expected.items():
            assert snapshot[key] == value, key
        assert snapshot["real_count"] + snapshot["fake_count"] == snapshot["total_predictions"]
        assert sum(snapshot["per_model"].values()) == snapshot["total_predictions"]
        assert sum(snapshot["per_region_users"].values()) == snapshot["total_users"]
        db.close()
    report("statistics oracle (50 randomized populations, exact recount)")


# ---------------------------------------------------------------------------
# 7. MLLM contract
# ---------------------------------------------------------------------------


def test_criterion_mllm_contract(tmp_path):
    services = build_services(make_config(tmp_path))
    stub = StubAdapterServer()
    services.chat.chat_url = stub.url
    services.chat.transcribe_url = stub.url
    user = register_user(services)
    upload = services.ingest.ingest(
        user.user_id, "speech.wav", make_wav(sine_samples(200, 16000, 0.2)), True
    )
    session = services.workspace.create_session(
        user.user_id, "whisper+qwen2-vl-2b", upload.upload_id
    )

    transcript_text = "the quick brown fox said hello world"

    def behavior(path, body):
        if path == "/v1/transcribe":
            return 200, {"transcript": transcript_text}
        return 200, {"text": "Speaker sounds steady; content is mundane."}

    stub.behavior = behavior
    refreshed = services.workspace.send_message(
        user.user_id, session.session_id, "Does this audio sound authentic?"
    )
    (chat_request,) = stub.requests_for("/v1/chat")
    composed = chat_request["messages"][-1]["text"]
    assert transcript_text in composed, "stage-2 prompt must embed the transcript verbatim"
    assert refreshed.transcript == transcript_text

    # failure short-circuit: transcription fails -> no stage-2 call, refund
    stub.reset()
    stub.behavior = lambda p, b: (500, {"error": "down"})
    session2 = services.workspace.create_session(
        user.user_id, "whisper+qwen2-vl-2b", upload.upload_id
    )
    balance_before = services.accounts.get_balance(user.user_id)
    with pytest.raises(ServiceError) as err:
        services.workspace.send_message(user.user_id, session2.session_id, "authentic?")
    assert err.value.code == "transcription_failed"
    assert stub.requests_for("/v1/chat") == []
    assert services.accounts.get_balance(user.user_id) == balance_before

    # serialized responses carry no label/score fields anywhere
    app = create_app(services.config, services)
    with TestClient(app) as client:
        login = client.post(
            "/api/login", json={"email": user.email, "password": "hunter2abc1"}
        )
        headers = {"Authorization": f"Bearer {login.json()['token']}"}
        stub.behavior = behavior
        fetched_session = client.post(
            "/api/mllm/sessions", headers=headers, json={"model_id": "qwen-vl-chat"}
        )
        message = client.post(
            f"/api/mllm/sessions/{fetched_session.json()['session_id']}/messages",
            headers=headers,
            json={"prompt": "Is this image real?"},
        )
        assert message.status_code == 200

        def keys_of(obj):
            if isinstance(obj, dict):
                for k, v in obj.items():
                    yield k
                    yield from keys_of(v)
            elif isinstance(obj, list):
                for v in obj:
                    yield from keys_of(v)

        for payload in (fetched_session.json(), message.json()):
            keys = set(keys_of(payload))
            assert "label" not in keys and "score" not in keys

    stub.close()
    services.db.close()
    report("mllm contract (verbatim transcript, stage-2 short-circuit, no label/score fields)")


# ---------------------------------------------------------------------------
# 8. Multi-worker statelessness
# ---------------------------------------------------------------------------


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_healthy(base_url: str, timeout_s: float = 20.0) -> None:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            if httpx.get(f"{base_url}/healthz", timeout=1.0).status_code == 200:
                return
        except httpx.TransportError:
            time.sleep(0.1)
    raise RuntimeError(f"worker at {base_url} never became healthy")


def test_criterion_multi_worker_statelessness(tmp_path):
    stub = StubAdapterServer()
    store_url = f"sqlite:///{tmp_path}/shared.db"
    env = {
        **os.environ,
        "STORE_URL": store_url,
        "BLOB_ROOT": str(tmp_path / "blobs"),
        "TOKEN_KEY": "multi-worker-test-key",
        "ADMIN_EMAIL": "admin@example.org",
        "PASSWORD_HASH_ITERATIONS": "1000",
        "ADAPTER_URL_XCEPTION": stub.url,
        "CHAT_URL": stub.url,
        "TRANSCRIBE_URL": stub.url,
    }
    ports = [_free_port(), _free_port()]
    workers = []
    try:
        for port in ports:
            worker_env = {**env, "BIND_ADDR": f"127.0.0.1:{port}"}
            workers.append(
                subprocess.Popen(
                    [sys.executable, "-m", "fakefinder", "serve"],
                    env=worker_env,
                    stdout=subprocess.DEVNULL,
                    stderr=subprocess.DEVNULL,
                )
            )
        bases = [f"http://127.0.0.1:{port}" for port in ports]
        for base in bases:
            _wait_healthy(base)

        with httpx.Client(timeout=10.0) as http:
            # register on worker A, login on worker B: shared store, no session state
            register = http.post(
                f"{bases[0]}/api/register",
                json={
                    "name": "Split User", "email": "split@example.org",
                    "position": "x", "region": "US",
                    "password": "hunter2abc1", "password_confirm": "hunter2abc1",
                },
            )
            assert register.status_code == 201, register.text
            user_id = register.json()["user_id"]
            login = http.post(
                f"{bases[1]}/api/login",
                json={"email": "split@example.org", "password": "hunter2abc1"},
            )
            headers = {"Authorization": f"Bearer {login.json()['token']}"}

            upload = http.post(
                f"{bases[0]}/api/uploads",
                headers=headers,
                files={"file": ("c.png", solid_png(8, 8, 60), "image/png")},
                data={"consent": "true"},
            )
            assert upload.status_code == 201, upload.text
            upload_id = upload.json()["upload_id"]

            # 40 concurrent charges (native inferences) split across both workers
            def fire(i: int) -> int:
                base = bases[i % 2]
                response = httpx.post(
                    f"{base}/api/inferences",
                    headers=headers,
                    json={"upload_id": upload_id, "detector_id": "freq-heuristic-v1"},
                    timeout=30.0,
                )
                if response.status_code == 201:
                    return 1
                assert response.status_code == 402, response.text
                assert response.json()["error"]["code"] == "insufficient_credits"
                return 0

            with ThreadPoolExecutor(max_workers=8) as pool:
                successes = sum(pool.map(fire, range(40)))
            assert successes == 20

            balances = [
                http.get(f"{base}/api/credits", headers=headers).json()["balance"]
                for base in bases
            ]
            assert balances == [0, 0]

            history_a = http.get(
                f"{bases[0]}/api/inferences", headers=headers,
                params={"page_size": 100},
            ).json()
            history_b = http.get(
                f"{bases[1]}/api/inferences", headers=headers,
                params={"page_size": 100},
            ).json()
            assert len(history_a) == len(history_b) == 20
            assert {p["prediction_id"] for p in history_a} == {
                p["prediction_id"] for p in history_b
            }
    finally:
        for worker in workers:
            worker.send_signal(signal.SIGTERM)
        for worker in workers:
            worker.wait(timeout=10)
        stub.close()

    db = Database(store_url)
    rows = db.query("SELECT * FROM credits WHERE user_id = :u ORDER BY seq", {"u": user_id})
    assert replay_ledger(rows) == 0
    log_count = db.scalar("SELECT COUNT(*) FROM model_logs")
    assert log_count == 20  # only the 20 charged attempts dispatched
    db.close()
    report("multi-worker statelessness (two serve processes, one store, 40-way contention)")


# ---------------------------------------------------------------------------
# 9. API contract sweep
# ---------------------------------------------------------------------------


def test_criterion_api_contract_sweep(tmp_path):
    stub = StubAdapterServer()
    config = make_config(tmp_path, image_size_limit=4096)
    services = build_services(config)
    services.remote.adapter_urls["xception"] = stub.url
    services.remote.adapter_urls["pg-fdd"] = UNREACHABLE_URL
    services.chat.chat_url = stub.url
    services.chat.transcribe_url = stub.url
    app = create_app(config, services)

    with TestClient(app, raise_server_exceptions=False) as client:
        # fixtures for the sweep
        def register(email):
            r = client.post("/api/register", json={
                "name": "Sweep", "email": email, "position": "x", "region": "US",
                "password": "hunter2abc1", "password_confirm": "hunter2abc1"})
            assert r.status_code == 201
            login = client.post("/api/login", json={"email": email, "password": "hunter2abc1"})
            return r.json(), {"Authorization": f"Bearer {login.json()['token']}"}

        account, headers = register("sweeper@example.org")
        other_account, other_headers = register("bystander@example.org")
        _, admin_headers = register("admin@example.org")

        png = solid_png(8, 8, 10)
        upload = client.post("/api/uploads", headers=headers,
                             files={"file": ("c.png", png, "image/png")},
                             data={"consent": "true"}).json()
        avif = client.post("/api/uploads", headers=headers,
                           files={"file": ("a.avif", make_avif(), "image/avif")},
                           data={"consent": "true"}).json()
        wav = client.post("/api/uploads", headers=headers,
                          files={"file": ("s.wav", make_wav(sine_samples(100, 16000, 0.1)),
                                          "audio/wav")},
                          data={"consent": "true"}).json()
        other_upload = client.post("/api/uploads", headers=other_headers,
                                   files={"file": ("o.png", solid_png(4, 4, 1), "image/png")},
                                   data={"consent": "true"}).json()
        hybrid = client.post("/api/mllm/sessions", headers=headers,
                             json={"model_id": "whisper+qwen2-vl-2b",
                                   "upload_id": wav["upload_id"]}).json()
        chat = client.post("/api/mllm/sessions", headers=headers,
                           json={"model_id": "qwen-vl-chat"}).json()

        broke_user, broke_headers = register("broke@example.org")
        broke_upload = client.post("/api/uploads", headers=broke_headers,
                                   files={"file": ("b.png", solid_png(6, 6, 3), "image/png")},
                                   data={"consent": "true"}).json()
        broke_chat = client.post("/api/mllm/sessions", headers=broke_headers,
                                 json={"model_id": "qwen-vl-chat"}).json()
        for i in range(20):
            services.accounts.charge_credit(broke_user["user_id"], ref=f"sweep{i}")

        expired = datetime.now(timezone.utc) - timedelta(hours=30)
        expired_token, _ = services.accounts.login(
            "sweeper@example.org", "hunter2abc1", now=expired
        )

        def expect(code, response):
            assert response.status_code == ERROR_STATUS[code], (
                code, response.status_code, response.text
            )
            body = response.json()
            assert set(body) == {"error"}, code
            assert set(body["error"]) == {"code", "message"}, code
            assert body["error"]["code"] == code, (code, body)

        def multipart(files=None, data=None, hdrs=headers):
            return client.post("/api/uploads", headers=hdrs, files=files, data=data)

        slow_stub = StubAdapterServer()
        slow_stub.delay_s = 3.0

        checks = [
            # register
            ("duplicate_email", lambda: client.post("/api/register", json={
                "name": "n", "email": "sweeper@example.org", "position": "x",
                "region": "US", "password": "hunter2abc1", "password_confirm": "hunter2abc1"})),
            ("weak_password", lambda: client.post("/api/register", json={
                "name": "n", "email": "w1@example.org", "position": "x",
                "region": "US", "password": "abc", "password_confirm": "abc"})),
            ("mismatched_confirmation", lambda: client.post("/api/register", json={
                "name": "n", "email": "w2@example.org", "position": "x",
                "region": "US", "password": "hunter2abc1", "password_confirm": "hunter2abc2"})),
            ("invalid_region", lambda: client.post("/api/register", json={
                "name": "n", "email": "w3@example.org", "position": "x",
                "region": "ZZ", "password": "hunter2abc1", "password_confirm": "hunter2abc1"})),
            ("invalid_email", lambda: client.post("/api/register", json={
                "name": "n", "email": "not-an-email", "position": "x",
                "region": "US", "password": "hunter2abc1", "password_confirm": "hunter2abc1"})),
            ("validation_error", lambda: client.post("/api/register", json={"name": "n"})),
            # login / auth
            ("invalid_credentials", lambda: client.post("/api/login", json={
                "email": "sweeper@example.org", "password": "wrong12345"})),
            ("invalid_token", lambda: client.get("/api/credits")),
            ("expired_token", lambda: client.get(
                "/api/credits", headers={"Authorization": f"Bearer {expired_token}"})),
            # admin credits
            ("not_admin", lambda: client.post("/api/admin/credits", headers=headers,
                json={"user_id": account["user_id"], "amount": 1, "note": ""})),
            ("invalid_amount", lambda: client.post("/api/admin/credits", headers=admin_headers,
                json={"user_id": account["user_id"], "amount": 0, "note": ""})),
            ("unknown_user", lambda: client.post("/api/admin/credits", headers=admin_headers,
                json={"user_id": "ghost", "amount": 5, "note": ""})),
            # uploads
            ("consent_required", lambda: multipart(
                files={"file": ("c.png", png, "image/png")}, data={"consent": "false"})),
            ("unsupported_format", lambda: multipart(
                files={"file": ("t.txt", b"plain text, nothing else", "text/plain")},
                data={"consent": "true"})),
            ("too_large", lambda: multipart(
                files={"file": ("big.png", _incompressible_png(), "image/png")},
                data={"consent": "true"})),
            # detectors
            ("validation_error", lambda: client.get(
                "/api/detectors", headers=headers, params={"modality": "video"})),
            # inference
            ("not_found", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": "missing", "detector_id": "xception"})),
            ("forbidden", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": other_upload["upload_id"], "detector_id": "xception"})),
            ("unknown_detector", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": upload["upload_id"], "detector_id": "no-such"})),
            ("detector_not_runnable", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": upload["upload_id"], "detector_id": "qwen-vl-chat"})),
            ("modality_mismatch", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": wav["upload_id"], "detector_id": "xception"})),
            ("insufficient_credits", lambda: client.post("/api/inferences", headers=broke_headers,
                json={"upload_id": broke_upload["upload_id"], "detector_id": "freq-heuristic-v1"})),
            ("adapter_unreachable", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": upload["upload_id"], "detector_id": "pg-fdd"})),
            ("undecodable_format", lambda: client.post("/api/inferences", headers=headers,
                json={"upload_id": avif["upload_id"], "detector_id": "freq-heuristic-v1"})),
            ("invalid_page", lambda: client.get("/api/inferences", headers=headers,
                params={"page": 1, "page_size": 0})),
            ("not_found", lambda: client.get("/api/inferences/ghost", headers=headers)),
            # mllm
            ("unknown_model", lambda: client.post("/api/mllm/sessions", headers=headers,
                json={"model_id": "made-up"})),
            ("modality_mismatch", lambda: client.post("/api/mllm/sessions", headers=headers,
                json={"model_id": "whisper+qwen2-vl-2b", "upload_id": upload["upload_id"]})),
            ("foreign_upload", lambda: client.post("/api/mllm/sessions", headers=headers,
                json={"model_id": "qwen-vl-chat", "upload_id": other_upload["upload_id"]})),
            ("not_found", lambda: client.post("/api/mllm/sessions", headers=headers,
                json={"model_id": "qwen-vl-chat", "upload_id": "ghost"})),
            ("session_not_found", lambda: client.post(
                "/api/mllm/sessions/ghost/messages", headers=headers, json={"prompt": "x"})),
            ("validation_error", lambda: client.post(
                f"/api/mllm/sessions/{chat['session_id']}/messages", headers=headers,
                json={"prompt": "  "})),
            ("insufficient_credits", lambda: client.post(
                f"/api/mllm/sessions/{broke_chat['session_id']}/messages", headers=broke_headers,
                json={"prompt": "hello"})),
            # feedback
            ("invalid_rating", lambda: client.post("/api/feedback", headers=headers, json={
                "models_used": [], "formats_used": [], "most_accurate_model": "unsure",
                "rating": 6})),
            ("unknown_model_reference", lambda: client.post("/api/feedback", headers=headers,
                json={"models_used": ["bogus"], "formats_used": [],
                      "most_accurate_model": "unsure", "rating": 3})),
            ("invalid_format_option", lambda: client.post("/api/feedback", headers=headers,
                json={"models_used": [], "formats_used": ["hologram"],
                      "most_accurate_model": "unsure", "rating": 3})),
            ("not_admin", lambda: client.get("/api/admin/feedback", headers=headers)),
        ]

        for code, trigger in checks:
            expect(code, trigger())

        # session_not_found for a foreign session; charge refunded on failure paths
        foreign_session = client.post(
            "/api/mllm/sessions", headers=other_headers, json={"model_id": "qwen-vl-chat"}
        ).json()
        expect("session_not_found", client.post(
            f"/api/mllm/sessions/{foreign_session['session_id']}/messages",
            headers=headers, json={"prompt": "x"}))

        # adapter_timeout via a slow stub and a short client timeout
        services.remote.adapter_urls["xception"] = slow_stub.url
        services.remote.timeout_s = 0.3
        expect("adapter_timeout", client.post("/api/inferences", headers=headers,
            json={"upload_id": upload["upload_id"], "detector_id": "xception"}))

        # malformed_response from an out-of-range score
        services.remote.timeout_s = 5.0
        bad_stub = StubAdapterServer(behavior=lambda p, b: (200, {"label": "fake", "score": 7}))
        services.remote.adapter_urls["xception"] = bad_stub.url
        expect("malformed_response", client.post("/api/inferences", headers=headers,
            json={"upload_id": upload["upload_id"], "detector_id": "xception"}))
        bad_stub.close()

        # transcription_failed / analysis_failed on the hybrid pipeline
        fail_transcribe = StubAdapterServer(behavior=lambda p, b: (500, {"error": "x"}))
        services.chat.transcribe_url = fail_transcribe.url
        expect("transcription_failed", client.post(
            f"/api/mllm/sessions/{hybrid['session_id']}/messages", headers=headers,
            json={"prompt": "authentic?"}))
        fail_transcribe.close()

        ok_transcribe = StubAdapterServer(
            behavior=lambda p, b: (200, {"transcript": "words"}))
        fail_chat = StubAdapterServer(behavior=lambda p, b: (500, {"error": "x"}))
        services.chat.transcribe_url = ok_transcribe.url
        services.chat.chat_url = fail_chat.url
        expect("analysis_failed", client.post(
            f"/api/mllm/sessions/{hybrid['session_id']}/messages", headers=headers,
            json={"prompt": "authentic?"}))
        ok_transcribe.close()
        fail_chat.close()

        # adapter_unreachable on plain chat
        services.chat.chat_url = UNREACHABLE_URL
        expect("adapter_unreachable", client.post(
            f"/api/mllm/sessions/{chat['session_id']}/messages", headers=headers,
            json={"prompt": "hello"}))

        # auth sweep: every protected route answers 401 bare
        protected = [
            ("GET", "/api/credits"), ("POST", "/api/admin/credits"),
            ("POST", "/api/uploads"), ("GET", "/api/detectors"),
            ("POST", "/api/inferences"), ("GET", "/api/inferences"),
            ("GET", "/api/inferences/x"), ("POST", "/api/mllm/sessions"),
            ("POST", "/api/mllm/sessions/x/messages"), ("GET", "/api/statistics"),
            ("POST", "/api/feedback"), ("GET", "/api/admin/feedback"),
        ]
        for method, path in protected:
            response = client.request(method, path)
            assert response.status_code == 401, path
            assert response.json()["error"]["code"] == "invalid_token"

        slow_stub.close()

    stub.close()
    services.db.close()
    report(f"api contract sweep ({len(checks) + 6} error scenarios, {len(protected)} auth checks)")
