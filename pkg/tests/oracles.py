"""Independent brute-force oracles shared by unit and acceptance tests."""

from treelm.treebank import Gen, Nt


def prefix_status(actions):
    """'dead' | 'open' | 'complete' by direct list-of-lists simulation."""
    stack = []
    complete = False
    for a in actions:
        if complete:
            return "dead"
        if isinstance(a, Nt):
            stack.append([])
        elif isinstance(a, Gen):
            if not stack:
                return "dead"
            stack[-1].append(a.word)
        else:
            if not stack or not stack[-1]:
                return "dead"
            top = stack.pop()
            if stack:
                stack[-1].append(top)
            else:
                complete = True
    return "complete" if complete else "open"


def brute_force_legal_events(space, prefix_events):
    """Events whose addition keeps the prefix alive, per the simulator."""
    prefix = space.decode(list(prefix_events))
    legal = set()
    for event in range(space.event_size):
        if prefix_status(prefix + [space.action_of_event(event)]) != "dead":
            legal.add(event)
    return legal
