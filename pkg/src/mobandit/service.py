"""Live preference-elicitation HTTP service.

Each session runs the multivariate Thompson sampler with a human (or a
scripted oracle) standing in for the preference argmax: the service draws
one estimate vector per action from the current posterior, presents them
all, plays the chosen action, and advances the posterior.

Presentations and tie-breaks consume the session's counter-based policy
stream in exactly the order the batch harness does, so a scripted session
reproduces the harness trajectory for the same seed, and a repeated
presentation (or one regenerated after a restart) returns bit-identical
estimates.  Sessions persist as append-only JSONL records and are rebuilt
by replaying observations through the posterior.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .environments import (
    EnvironmentSpec,
    NoiseStream,
    environment_from_dict,
    sample_outcome,
)
from .geometry import Action, ActionSet, ObjectiveVector, pareto_front
from .policies import (
    PosteriorState,
    argmax_ties,
    initial_state,
    posterior_matrix,
    sample_posterior_matrix,
    update,
)
from .preferences import GapTable, Preference, gap_table, preference_from_dict

__all__ = ["ElicitService", "SessionStore", "build_app"]

HUMAN = "human"
SCRIPTED = "scripted"
ACTIVE = "active"
FINISHED = "finished"


class ApiError(Exception):
    """Error carrying the HTTP status and the wire {code, message} payload."""

    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _invalid(message: str) -> ApiError:
    return ApiError(400, "invalid_config", message)


@dataclass(frozen=True)
class _Pending:
    """A presented-but-unanswered sampling round.

    ``rng`` is the episode's policy generator positioned right after the
    estimate draw, so the tie-break consumed at choice time continues the
    exact stream the batch sampler would use.
    """

    episode: int
    thetas: np.ndarray
    options: tuple[dict, ...]
    rng: np.random.Generator


@dataclass(frozen=True)
class _HistoryEntry:
    episode: int
    options: tuple[dict, ...]
    chosen_index: int
    chosen_by: str
    observation: tuple[float, ...]
    posterior_means: tuple[tuple[float, ...], ...]

    def to_dict(self) -> dict:
        return {
            "episode": self.episode,
            "options": [dict(o) for o in self.options],
            "chosen_index": self.chosen_index,
            "chosen_by": self.chosen_by,
            "observation": list(self.observation),
            "posterior_means": [list(row) for row in self.posterior_means],
        }


@dataclass
class _Session:
    id: str
    environment: EnvironmentSpec
    mode: str
    horizon: int
    seed: int
    preference: Preference | None
    gaps: GapTable | None
    stream: NoiseStream
    state: PosteriorState
    episode: int = 0
    cum_regret: float = 0.0
    history: list[_HistoryEntry] = field(default_factory=list)
    pending: _Pending | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def status(self) -> str:
        return FINISHED if self.episode >= self.horizon else ACTIVE


class SessionStore:
    """Append-only JSONL persistence; one record per create or step."""

    def __init__(self, path: str | Path | None) -> None:
        self._path = None if path is None else Path(path)
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        if self._path is None:
            return
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with open(self._path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")

    def load(self) -> list[dict]:
        if self._path is None or not self._path.exists():
            return []
        records = []
        with open(self._path, "r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValueError(
                        f"corrupt session store {self._path} at line {number}: {exc}"
                    ) from exc
        return records


class ElicitService:
    """Session registry plus the present/choose/advance state machine."""

    def __init__(self, store: SessionStore) -> None:
        self._store = store
        self._sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()
        for record in store.load():
            self._replay(record)

    # -- registry ----------------------------------------------------------

    def _get(self, session_id: str) -> _Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, "not_found", f"unknown session {session_id!r}")
        return session

    def _replay(self, record: dict) -> None:
        kind = record.get("type")
        if kind == "create":
            session = self._build_session(
                session_id=record["id"],
                env_data=record["env"],
                mode=record["mode"],
                horizon=record["horizon"],
                seed=record["seed"],
                preference_data=record.get("preference"),
            )
            with self._registry_lock:
                self._sessions[session.id] = session
            return
        if kind == "step":
            session = self._sessions.get(record["id"])
            if session is None:
                raise ValueError(f"step record for unknown session {record['id']!r}")
            observation = tuple(float(v) for v in record["observation"])
            self._advance(
                session,
                action=int(record["action"]),
                observation=observation,
                chosen_by=record["chosen_by"],
                options=tuple(record["options"]),
                persist=False,
            )
            return
        raise ValueError(f"unknown session store record type {kind!r}")

    def _build_session(
        self,
        session_id: str,
        env_data: dict,
        mode: str,
        horizon: int,
        seed: int,
        preference_data: dict | None,
    ) -> _Session:
        try:
            environment = environment_from_dict(env_data)
        except (ValueError, KeyError, TypeError) as exc:
            raise _invalid(f"bad environment config: {exc}") from exc
        if mode not in (HUMAN, SCRIPTED):
            raise _invalid(f"mode must be {HUMAN!r} or {SCRIPTED!r}, got {mode!r}")
        if horizon < 1:
            raise _invalid(f"horizon must be >= 1, got {horizon}")
        preference = None
        if preference_data is not None:
            try:
                preference = preference_from_dict(preference_data)
            except (ValueError, KeyError, TypeError) as exc:
                raise _invalid(f"bad preference config: {exc}") from exc
            if preference.dimension != environment.dimension:
                raise _invalid(
                    f"preference dimension {preference.dimension} does not match "
                    f"environment dimension {environment.dimension}"
                )
        if mode == SCRIPTED and preference is None:
            raise _invalid("scripted mode needs a preference to act as the oracle")
        try:
            stream = NoiseStream(seed)
        except ValueError as exc:
            raise _invalid(str(exc)) from exc
        gaps = None if preference is None else gap_table(preference, environment.actions)
        return _Session(
            id=session_id,
            environment=environment,
            mode=mode,
            horizon=horizon,
            seed=seed,
            preference=preference,
            gaps=gaps,
            stream=stream,
            state=initial_state(len(environment.actions), environment.dimension),
        )

    # -- operations --------------------------------------------------------

    def create_session(
        self,
        env_data: dict,
        mode: str,
        horizon: int,
        seed: int,
        preference_data: dict | None = None,
    ) -> dict:
        session = self._build_session(
            session_id=uuid.uuid4().hex,
            env_data=env_data,
            mode=mode,
            horizon=horizon,
            seed=seed,
            preference_data=preference_data,
        )
        with self._registry_lock:
            self._sessions[session.id] = session
        self._store.append(
            {
                "type": "create",
                "id": session.id,
                "env": env_data,
                "mode": mode,
                "horizon": horizon,
                "seed": seed,
                "preference": preference_data,
            }
        )
        return {"id": session.id, "status": session.status, "episode": session.episode}

    def _present(self, session: _Session) -> _Pending:
        """Draw (or return the already-drawn) estimates for the next episode."""
        if session.pending is not None:
            return session.pending
        episode = session.episode + 1
        rng = session.stream.policy_rng(episode)
        thetas = sample_posterior_matrix(session.state, rng)
        options = tuple(
            {
                "index": i,
                "action": session.environment.actions[i].name,
                "theta": [float(v) for v in thetas[i]],
            }
            for i in range(len(thetas))
        )
        session.pending = _Pending(episode=episode, thetas=thetas, options=options, rng=rng)
        return session.pending

    @staticmethod
    def _front_filter(options: tuple[dict, ...]) -> list[dict]:
        estimates = ActionSet(
            tuple(
                Action(option["action"], ObjectiveVector(tuple(option["theta"])))
                for option in options
            )
        )
        keep = pareto_front(estimates)
        return [dict(option) for i, option in enumerate(options) if i in keep]

    def next_options(self, session_id: str, front_only: bool = False) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.status == FINISHED:
                raise ApiError(409, "finished", f"session {session_id} is finished")
            pending = self._present(session)
            options = (
                self._front_filter(pending.options)
                if front_only
                else [dict(option) for option in pending.options]
            )
            return {"episode": pending.episode, "options": options}

    def _advance(
        self,
        session: _Session,
        action: int,
        observation: tuple[float, ...],
        chosen_by: str,
        options: tuple[dict, ...],
        persist: bool,
    ) -> dict:
        session.state = update(session.state, action, observation)
        session.episode += 1
        if session.gaps is not None:
            session.cum_regret += session.gaps.gaps[action]
        means, _ = posterior_matrix(session.state)
        entry = _HistoryEntry(
            episode=session.episode,
            options=options,
            chosen_index=action,
            chosen_by=chosen_by,
            observation=observation,
            posterior_means=tuple(tuple(float(v) for v in row) for row in means),
        )
        session.history.append(entry)
        session.pending = None
        if persist:
            self._store.append(
                {
                    "type": "step",
                    "id": session.id,
                    "episode": session.episode,
                    "action": action,
                    "chosen_by": chosen_by,
                    "observation": list(observation),
                    "options": [dict(option) for option in options],
                }
            )
        result = {
            "episode": session.episode,
            "observation": list(observation),
            "status": session.status,
        }
        if session.gaps is not None:
            result["cum_regret"] = session.cum_regret
        return result

    def _choose_scripted(self, session: _Session, pending: _Pending) -> int:
        assert session.preference is not None
        options = argmax_ties(session.preference.values(pending.thetas))
        return options[int(pending.rng.integers(len(options)))]

    def submit_choice(self, session_id: str, index: int | None) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.status == FINISHED:
                raise ApiError(409, "finished", f"session {session_id} is finished")
            pending = session.pending
            if pending is None:
                raise ApiError(
                    409, "no_pending_presentation", "fetch options before submitting a choice"
                )
            if index is None:
                if session.mode != SCRIPTED:
                    raise ApiError(400, "index_required", "human sessions must send an index")
                action = self._choose_scripted(session, pending)
                chosen_by = "oracle"
            else:
                if not 0 <= index < len(pending.options):
                    raise ApiError(
                        400,
                        "bad_index",
                        f"index {index} out of range for {len(pending.options)} options",
                    )
                action = int(index)
                chosen_by = HUMAN if session.mode == HUMAN else "caller"
            observation = sample_outcome(
                session.environment, action, session.stream, pending.episode
            )
            return self._advance(
                session,
                action=action,
                observation=observation.values,
                chosen_by=chosen_by,
                options=pending.options,
                persist=True,
            )

    def run_to_completion(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.mode != SCRIPTED:
                raise ApiError(409, "not_scripted", "run requires a scripted session")
            played = 0
            last: dict | None = None
            while session.status == ACTIVE:
                pending = self._present(session)
                action = self._choose_scripted(session, pending)
                observation = sample_outcome(
                    session.environment, action, session.stream, pending.episode
                )
                last = self._advance(
                    session,
                    action=action,
                    observation=observation.values,
                    chosen_by="oracle",
                    options=pending.options,
                    persist=True,
                )
                played += 1
            result = {"episodes_played": played, "episode": session.episode, "status": session.status}
            if session.gaps is not None:
                result["cum_regret"] = session.cum_regret
            return result

    def get_history(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            result = {
                "id": session.id,
                "mode": session.mode,
                "status": session.status,
                "episode": session.episode,
                "horizon": session.horizon,
                "history": [entry.to_dict() for entry in session.history],
            }
            if session.gaps is not None:
                result["cum_regret"] = session.cum_regret
            return result

    def posterior_snapshot(self, session_id: str) -> PosteriorState:
        """Current posterior statistics; used for persistence checks."""
        session = self._get(session_id)
        with session.lock:
            return session.state


class _CreateBody(BaseModel):
    env: dict
    mode: Literal["human", "scripted"]
    horizon: int
    seed: int
    preference: dict | None = None


class _ChoiceBody(BaseModel):
    index: int | None = None


def build_app(store_path: str | Path | None = None) -> FastAPI:
    """Assemble the FastAPI app around a session store file.

    ``store_path=None`` runs fully in memory (no persistence); otherwise
    existing records are replayed into live sessions before serving.
    """
    service = ElicitService(SessionStore(store_path))
    app = FastAPI(title="mobandit elicitation service")
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400, content={"code": "invalid_request", "message": str(exc.errors())}
        )

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions")
    async def create_session(body: _CreateBody) -> dict:
        return service.create_session(
            env_data=body.env,
            mode=body.mode,
            horizon=body.horizon,
            seed=body.seed,
            preference_data=body.preference,
        )

    @app.get("/sessions/{session_id}/options")
    async def next_options(session_id: str, front_only: bool = False) -> dict:
        return service.next_options(session_id, front_only=front_only)

    @app.post("/sessions/{session_id}/choice")
    async def submit_choice(session_id: str, body: _ChoiceBody) -> dict:
        return service.submit_choice(session_id, body.index)

    @app.post("/sessions/{session_id}/run")
    async def run_to_completion(session_id: str) -> dict:
        return service.run_to_completion(session_id)

    @app.get("/sessions/{session_id}/history")
    async def get_history(session_id: str) -> dict:
        return service.get_history(session_id)

    return app
