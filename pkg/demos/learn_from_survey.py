"""Learn a SEP-net from a synthetic survey and query it.

The survey comes from ``structured_survey``, whose dependency structure is
known, so the printed edges can be checked by eye.  Pass a CSV path to
learn from your own data instead (same columns as ``sepnets.learn.HEADER``).
"""

import sys
import warnings

from sepnets.learn import ingest, infer_structure, order_effect_screen, structured_survey
from sepnets.prefmodel import serialize_net
from sepnets.sepnet import MissingStatementWarning, sep_optimal


def main(argv):
    records = ingest(argv[0]) if argv else structured_survey()
    print(f"{len(records)} responses from {len({r.subject_id for r in records})} subjects")

    screen = order_effect_screen(records)
    flagged = [r.code for r in screen.rows if r.result.reject]
    print(f"question order matters for: {', '.join(flagged) or 'no scenario'}")

    result = infer_structure(records)
    print("\nedges:")
    for src, tgt in sorted(result.edge_set()):
        print(f"  {src} -> {tgt}")

    print("\npredicted judgment per scenario:")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MissingStatementWarning)
        for reason, location in [("Spoon", "Deli"), ("Soda", "Deli"), ("Vomit", "Bathroom"),
                                 ("Departure in 20min", "Airport")]:
            best = sep_optimal(result.net, {"Reason": reason, "Location": location}, tie_break=True)
            print(f"  {reason:>20} @ {location:<8} cut the line? {dict(best.preferences)['Judgment']}")

    text = serialize_net(result.net)
    print(f"\nlearned net document: {len(text.splitlines())} lines; first few:")
    print("\n".join(text.splitlines()[:14]))


if __name__ == "__main__":
    main(sys.argv[1:])
