from enum import Enum
from typing import List

from cover.constants import CODING_FRAUD, FRAUD_PROOF, HEADER, INTEREST, SYMBOL


class Channel(Enum):
    """The kind of a simulated message. Each node subscribes one handler
    per channel.

    Attributes:

        HEADER ('header'):
            Block headers.

        SYMBOL ('symbol'):
            Coded Merkle tree symbols with their proofs.

        FRAUD_PROOF ('fraud_proof'):
            Transaction, sorting and section-index fraud proofs.

        CODING_FRAUD ('coding_fraud'):
            Coding fraud proofs.

        INTEREST ('interest'):
            Interest lists for selective broadcast.
    """

    HEADER = HEADER
    SYMBOL = SYMBOL
    FRAUD_PROOF = FRAUD_PROOF
    CODING_FRAUD = CODING_FRAUD
    INTEREST = INTEREST


class Subscriber:
    """A subscriber data class used to store information about a specific
    subscriber to the `Publisher`."""

    def __init__(self, name, func, channel):
        """Create a subscriber.

        Parameters:

            name (int):
                The subscribing node.

            func (Callable):
                The function to call when messaging.

            channel (Channel):
                The subscription channel.
        """
        self.name = name
        self.func = func
        self.channel = channel


class Publisher:
    """Routes delivered messages to the handler a node registered for the
    message's channel. One publisher serves one simulated network."""

    def __init__(self):
        self._subscribers = {}

    def subscriber_count(self):
        return len(self._subscribers)

    def subscribe(self, name, func, channel):
        """Subscribe to a channel.

        Parameters:

            name (int):
                The node id.

            func (Callable):
                A function to call when passing a message.

            channel (Channel):
                The channel to receive.
        """
        self._subscribers[(name, channel)] = Subscriber(name, func, channel)

    def unsubscribe(self, name):
        """Remove every subscription of a node.

        Parameters:

            name (int):
                The node id.
        """
        for key in [key for key in self._subscribers if key[0] == name]:
            del self._subscribers[key]

    def get_subscribers(self, channel):
        """Return the subscribers of a channel.

        Returns:

            List[Subscriber]:
                The subscribers, in subscription order.
        """
        subs: List[Subscriber] = list(self._subscribers.values())
        return [s for s in subs if s.channel == channel]

    def publish_message(self, name, channel, *args):
        """Deliver a message to one node.

        Parameters:

            name (int):
                The receiving node.

            channel (Channel):
                The message's channel.

            *args:
                Arguments passed to the subscriber.

        Returns:

            bool:
                False when the node has no subscriber on the channel.
        """
        sub: Subscriber = self._subscribers.get((name, channel))
        if sub is None:
            return False
        sub.func(*args)
        return True

    def clear_subscribers(self):
        """Reset all subscriptions."""
        self._subscribers.clear()
