"""Async publish/subscribe bus for experiment events."""

import asyncio
import logging
from typing import Any, Callable, Coroutine, Dict, Set

from .types import Event, EventType

logger = logging.getLogger(__name__)

CallbackType = Callable[[Event], Coroutine[Any, Any, None]]


class EventBus:
    def __init__(self) -> None:
        self._subscribers: Dict[EventType, Set[CallbackType]] = {
            event: set() for event in EventType
        }
        self._queue: asyncio.Queue[Event] = asyncio.Queue()

    def subscribe(self, event_type: EventType, callback: CallbackType) -> None:
        """Subscribe to an event type."""
        self._subscribers[event_type].add(callback)

    def subscribe_all(self, callback: CallbackType) -> None:
        for event_type in EventType:
            self.subscribe(event_type, callback)

    def unsubscribe(self, event_type: EventType, callback: CallbackType) -> None:
        """Unsubscribe from an event type."""
        self._subscribers[event_type].discard(callback)

    async def publish(self, event: Event) -> None:
        """Queue an event for delivery to its subscribers."""
        await self._queue.put(event)

    async def join(self) -> None:
        """Wait until every queued event has been delivered."""
        await self._queue.join()

    async def start(self) -> None:
        """Deliver queued events until cancelled; subscriber errors are logged."""
        while True:
            event = await self._queue.get()
            for callback in list(self._subscribers[event.type]):
                try:
                    await callback(event)
                except Exception as e:
                    logger.error(f"Error in {callback} for {event.type.value}: {e}")
            self._queue.task_done()
