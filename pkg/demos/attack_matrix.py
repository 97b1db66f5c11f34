"""Which physical attacks on the shield change its observable behavior.

Each attack is applied to sequencers modeled by the protocol automaton.
An attack is detected when the attacked circuit can no longer perform some
protocol trace; the shortest such trace is printed as the witness.

    python3 demos/attack_matrix.py
"""
from shieldcheck import Voltage
from shieldcheck.attacks import (SHORT_PAIRS, Cut, CutVariant, Short, ShortPolicy, StuckAt,
                                 StuckVariant, apply_attack, detect)

attacks = [StuckAt(w, v, var) for w in ("R", "A") for v in Voltage for var in StuckVariant]
attacks += [Cut(w, var) for w in ("R", "A") for var in CutVariant]
attacks += [Short(a, b, pol) for pol in ShortPolicy for a, b in SHORT_PAIRS]

width = max(len(str(a)) for a in attacks)
for spec in attacks:
    verdict = detect(apply_attack(spec))
    print(f"{str(spec):<{width}}  {verdict}")
