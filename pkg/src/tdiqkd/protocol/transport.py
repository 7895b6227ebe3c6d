"""Duplex channels carrying wire lines between the two endpoints.

Both transports move the same newline-terminated byte format; the in-memory
one just skips the socket.
"""

from __future__ import annotations

import queue
import socket
import threading
from typing import Optional

from .wire import WireMessage

RECV_TIMEOUT = 120.0


class ChannelClosed(RuntimeError):
    pass


class Channel:
    """One end of a duplex link.  ``log`` collects ``(direction, line)`` pairs
    when given, where direction is ``"send"`` or ``"recv"``."""

    def __init__(self, log: Optional[list] = None):
        self.log = log

    def send(self, msg: WireMessage) -> None:
        line = msg.serialize()
        if self.log is not None:
            self.log.append(("send", line))
        self._send_line(line)

    def recv(self) -> WireMessage:
        line = self._recv_line()
        if self.log is not None:
            self.log.append(("recv", line))
        return WireMessage.parse(line)

    def close(self) -> None:
        pass

    def _send_line(self, line: str) -> None:
        raise NotImplementedError

    def _recv_line(self) -> str:
        raise NotImplementedError


class MemoryChannel(Channel):
    def __init__(self, outbox: queue.Queue, inbox: queue.Queue, log=None):
        super().__init__(log)
        self.outbox = outbox
        self.inbox = inbox

    def _send_line(self, line: str) -> None:
        self.outbox.put((line + "\n").encode())

    def _recv_line(self) -> str:
        try:
            data = self.inbox.get(timeout=RECV_TIMEOUT)
        except queue.Empty:
            raise ChannelClosed("timed out waiting for peer") from None
        if data is None:
            self.inbox.put(None)  # keep later reads failing too
            raise ChannelClosed("channel closed")
        return data.decode().rstrip("\n")

    def close(self) -> None:
        # wake both ends; anything already queued is still delivered first
        self.outbox.put(None)
        self.inbox.put(None)


class SocketChannel(Channel):
    """Socket end.  A reader thread drains incoming lines into a queue so a
    peer that sends a long burst never stalls on a full kernel buffer."""

    def __init__(self, sock: socket.socket, log=None):
        super().__init__(log)
        self.sock = sock
        self.reader = sock.makefile("rb")
        self.writer = sock.makefile("wb")
        self._inbox: queue.Queue = queue.Queue()
        self._pump = threading.Thread(target=self._drain, daemon=True)
        self._pump.start()

    def _drain(self) -> None:
        try:
            for data in self.reader:
                self._inbox.put(data)
        except (OSError, ValueError):
            pass
        self._inbox.put(None)

    def _send_line(self, line: str) -> None:
        self.writer.write((line + "\n").encode())
        self.writer.flush()

    def _recv_line(self) -> str:
        try:
            data = self._inbox.get(timeout=RECV_TIMEOUT)
        except queue.Empty:
            raise ChannelClosed("timed out waiting for peer") from None
        if data is None:
            self._inbox.put(None)
            raise ChannelClosed("peer closed the connection")
        return data.decode().rstrip("\n")

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        for f in (self.writer, self.reader):
            try:
                f.close()
            except (OSError, ValueError):
                pass
        self.sock.close()


def channel_pair(transport: str = "memory", log_a: Optional[list] = None, log_b: Optional[list] = None):
    """Return connected ``(alice_end, bob_end)`` channels."""
    if transport == "memory":
        a_to_b: queue.Queue = queue.Queue()
        b_to_a: queue.Queue = queue.Queue()
        return MemoryChannel(a_to_b, b_to_a, log_a), MemoryChannel(b_to_a, a_to_b, log_b)
    if transport == "socket":
        sa, sb = socket.socketpair()
        return SocketChannel(sa, log_a), SocketChannel(sb, log_b)
    raise ValueError(f"unknown transport {transport!r}")
