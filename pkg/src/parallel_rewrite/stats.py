import collections
import datetime
import time

import humanize


class Stats:
    def __init__(self):
        self.steps = 0
        self.matchings = 0
        self.applied = 0
        self.per_rule = collections.Counter()
        self.last_matches = []
        self.last_applied = []
        self._started = time.monotonic()

    def step(self, matches, applied=None) -> None:
        applied = matches if applied is None else applied
        self.last_matches, self.last_applied = list(matches), list(applied)
        self.steps += 1
        self.matchings += len(self.last_matches)
        self.applied += len(self.last_applied)
        self.per_rule.update(m.rule.name for m in self.last_matches)

    def summary(self) -> str:
        elapsed = datetime.timedelta(seconds=time.monotonic() - self._started)
        rules = ', '.join(f"{name}: {humanize.intcomma(n)}" for name, n in sorted(self.per_rule.items()))
        return f"""\
        Ran {humanize.intcomma(self.steps)} step(s) in {humanize.precisedelta(elapsed, minimum_unit='milliseconds')}
        Found {humanize.intcomma(self.matchings)} matching(s){f' ({rules})' if rules else ''}
        Applied {humanize.intcomma(self.applied)} matching(s)
        """
