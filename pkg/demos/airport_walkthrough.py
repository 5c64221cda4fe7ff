"""Reason about the bundled airport net: optima, dominance, the induced order.

Run with ``python demos/airport_walkthrough.py``.
"""

from sepnets import load_bundled
from sepnets.export import to_dot
from sepnets.prefmodel import Outcome
from sepnets.semantics import dominates, induced_preorder, optimal_outcome
from sepnets.sepnet import all_scenarios, sep_optimal


def main():
    net = load_bundled("airport")
    print(f"{net.name}: {', '.join(f'{v.name} ({v.kind.value})' for v in net.variables)}")

    for s in ("a", "ā"):
        print(f"best outcome with S={s}: {optimal_outcome(net, {'S': s})}")

    a = Outcome.of(net, ["a", "o", "c̄"])
    b = Outcome.of(net, ["a", "ō", "c"])
    result = dominates(net, a, b)
    print(f"\n{a} vs {b}: {result.relation.value}")
    for step in result.witness:
        print(f"  {step}")

    other = Outcome.of(net, ["ā", "o", "c"])
    print(f"{a} vs {other}: {dominates(net, a, other).relation.value}")

    graph = induced_preorder(net)
    print(f"\ninduced order: {len(graph.nodes)} outcomes in {len(graph.components)} components")
    print(to_dot(graph))

    sep = load_bundled("airport_sep")
    print("with S and T both fixed by the scenario:")
    for scenario in all_scenarios(sep):
        print(f"  {scenario}: {sep_optimal(sep, scenario).to_outcome(sep)}")


if __name__ == "__main__":
    main()
