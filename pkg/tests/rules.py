"""Instances of each derived-operator rewriting rule, drawn from a seeded generator."""

from stpl import fuzz
from stpl.formula.syntax import (
    AlwaysS, And, Always, Cl, Cup, Eventually, EventuallyS, Exists, Forall, IdCompare, Implies, Interval, Next, Not,
    Release, ReleaseS, SpatialExists, SpatialForall, Until, WeakNext, WeakPrev,
)


def _rule_instances():
    g = lambda rng: fuzz.FormulaGen(rng, max_depth=2)  # noqa: E731
    ids = (("id1", None),)
    iv = lambda rng: Interval(rng.choice((0, 0.5, 1)), rng.choice((1, 2, float("inf"))), True, True,  # noqa: E731
                              rng.choice(("time", "frame")))

    def wrap(body):
        return lambda rng: Exists("id1", rng.choice((None, "x9")), body(rng))

    def sub(rng):
        return g(rng).formula(ids, (), 2)

    def term(rng):
        return g(rng).term(ids, 1)

    return {
        "and": wrap(lambda r: And(sub(r), sub(r))),
        "implies": wrap(lambda r: Implies(sub(r), sub(r))),
        "weak-next": wrap(lambda r: WeakNext(sub(r))),
        "weak-prev": wrap(lambda r: Next(WeakPrev(sub(r)))),
        "release": wrap(lambda r: Release(sub(r), sub(r))),
        "eventually": wrap(lambda r: Eventually(sub(r))),
        "always": wrap(lambda r: Always(sub(r))),
        "forall": lambda r: Forall("id1", r.choice((None, "x9")), sub(r)),
        "id-inequality": wrap(lambda r: Not(IdCompare("id1", r.randint(1, 5), False))),
        "spatial-forall": wrap(lambda r: SpatialForall(term(r))),
        "union": wrap(lambda r: SpatialExists(Cup(term(r), term(r)))),
        "closure": wrap(lambda r: SpatialExists(Cl(term(r)))),
        "spatial-eventually": wrap(lambda r: SpatialExists(EventuallyS(term(r), r.choice((None, iv(r)))))),
        "spatial-always": wrap(lambda r: SpatialExists(AlwaysS(term(r), r.choice((None, iv(r)))))),
        "spatial-release": wrap(lambda r: SpatialExists(ReleaseS(term(r), term(r), r.choice((None, iv(r)))))),
        "until-interval": wrap(lambda r: Until(sub(r), sub(r), iv(r))),
        "release-interval": wrap(lambda r: Release(sub(r), sub(r), iv(r))),
        "eventually-interval": wrap(lambda r: Eventually(sub(r), iv(r))),
        "always-interval": wrap(lambda r: Always(sub(r), iv(r))),
        "next-interval": wrap(lambda r: Next(sub(r), iv(r))),
    }


RULES = _rule_instances()
