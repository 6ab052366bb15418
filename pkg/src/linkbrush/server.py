"""Websocket endpoint: one session served to any number of clients.

Messages are UTF-8 JSON, one protocol message per frame. All engine work runs
on the asyncio event loop thread, which is the session's single writer;
connection handlers only decode, dispatch and encode.

Scene diffs produced by one client's message are broadcast to every connected
client so all views stay coordinated; direct replies (query_result,
api_value, error) go only to the requester.
"""
from __future__ import annotations

import asyncio
import json
import logging
from typing import Optional

from .session import Session, wire_json

log = logging.getLogger(__name__)

BROADCAST_TYPES = ("scene_diff",)


class SessionServer:
    def __init__(self, session: Session):
        self.session = session
        self._clients: set = set()

    async def handler(self, websocket) -> None:
        self._clients.add(websocket)
        try:
            for msg in self.session.scenes_full():
                await websocket.send(wire_json(msg))
            async for raw in websocket:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as exc:
                    reply = self.session._msg("error", {"message": f"bad JSON: {exc}"})
                    await websocket.send(wire_json(reply))
                    continue
                replies = self.session.handle_message(msg, connection=str(id(websocket)))
                for reply in replies:
                    encoded = wire_json(reply)
                    if reply["type"] in BROADCAST_TYPES:
                        await self._broadcast(encoded, origin=websocket)
                    else:
                        await websocket.send(encoded)
        finally:
            self._clients.discard(websocket)

    async def _broadcast(self, encoded: str, origin) -> None:
        for client in list(self._clients):
            try:
                await client.send(encoded)
            except Exception:
                self._clients.discard(client)


async def serve_async(session: Session, host: str, port: int,
                      ready: Optional[asyncio.Event] = None):
    import websockets.asyncio.server as ws_server

    server = SessionServer(session)
    async with ws_server.serve(server.handler, host, port) as srv:
        bound = srv.sockets[0].getsockname() if srv.sockets else (host, port)
        log.info("serving session %s on ws://%s:%s", session.id, bound[0], bound[1])
        if ready is not None:
            ready.set()
        await asyncio.Future()  # run until cancelled


def serve(config_path, port: int, host: str = "127.0.0.1") -> None:
    """Blocking entry point used by the CLI."""
    session = Session.from_config_file(config_path)
    asyncio.run(serve_async(session, host, port))
