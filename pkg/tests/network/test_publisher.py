from cover.publisher import Channel, Publisher


def test_messages_reach_the_subscribed_channel_only():
    publisher = Publisher()
    received = []
    publisher.subscribe(1, lambda *args: received.append(args), Channel.SYMBOL)
    assert publisher.publish_message(1, Channel.SYMBOL, 0, "share")
    assert not publisher.publish_message(1, Channel.HEADER, 0, "header")
    assert not publisher.publish_message(2, Channel.SYMBOL, 0, "share")
    assert received == [(0, "share")]


def test_unsubscribe_removes_every_channel_of_a_node():
    publisher = Publisher()
    for channel in Channel:
        publisher.subscribe(3, print, channel)
    publisher.subscribe(4, print, Channel.HEADER)
    assert publisher.subscriber_count() == len(Channel) + 1
    publisher.unsubscribe(3)
    assert [s.name for s in publisher.get_subscribers(Channel.HEADER)] == [4]
    publisher.clear_subscribers()
    assert publisher.subscriber_count() == 0


def test_channel_values_name_the_message_kinds():
    assert Channel.CODING_FRAUD.value == "coding_fraud"
    assert Channel("interest") is Channel.INTEREST
