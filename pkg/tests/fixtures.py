"""Shared threat-model fixtures for attack-graph, CLI, and service tests.

Two small firmware scenarios are used throughout:

* ``external_chain``: one Internet-facing binary (openvpn) with a
  remotely exploitable flaw feeding data into wget, which has one too.
  Expected: both derive ``vulnerableSoftware``; metrics (1, 0, 1).

* ``hypothesis_fanout``: httpd carries an undocumented-bug hypothesis and
  fans out into bftpd, bzip2, dnsmasq, and openvpn; openvpn feeds wget
  and bzip2 feeds unzip which feeds zip. Every downstream binary except
  bftpd carries a remotely exploitable HIGH flaw, so exactly six binaries
  derive ``vulnerableSoftware`` next to ``potentiallyVulnerableSoftware``
  for httpd itself; metrics (0, 1, 6).
"""

from __future__ import annotations

import random

from firmgraph.datalog import Clause, parse_program
from firmgraph.rules import get_ruleset

EXTERNAL_CHAIN_FACTS = """\
externalInteraction('Internet', openvpn, internet).
dataFlow(openvpn, wget, 'environment').
vulExists('CVE-2020-15078', openvpn, 'NETWORK', 'confidentiality_loss', 'HIGH').
vulExists('CVE-2017-13089', wget, 'NETWORK', 'availability_loss', 'HIGH').
"""

HYPOTHESIS_FANOUT_FACTS = """\
bugHyp(httpd, 'LOCAL', 'Undefined').
dataFlow(httpd, bftpd, 'socket').
dataFlow(httpd, bzip2, 'exec').
dataFlow(httpd, dnsmasq, 'socket').
dataFlow(httpd, openvpn, 'exec').
dataFlow(openvpn, wget, 'environment').
dataFlow(bzip2, unzip, 'exec').
dataFlow(unzip, zip, 'exec').
vulExists('CVE-2019-12900', bzip2, 'NETWORK', 'data_modification', 'HIGH').
vulExists('CVE-2020-25681', dnsmasq, 'NETWORK', 'data_modification', 'HIGH').
vulExists('CVE-2020-15078', openvpn, 'NETWORK', 'confidentiality_loss', 'HIGH').
vulExists('CVE-2017-13089', wget, 'NETWORK', 'availability_loss', 'HIGH').
vulExists('CVE-2021-4217', unzip, 'NETWORK', 'availability_loss', 'HIGH').
vulExists('CVE-2018-13410', zip, 'NETWORK', 'availability_loss', 'HIGH').
"""


def _split(text: str) -> tuple[list[Clause], list[Clause], list[Clause]]:
    topology: list[Clause] = []
    vul: list[Clause] = []
    bug: list[Clause] = []
    for clause in parse_program(text).clauses:
        if clause.head.predicate == "vulExists":
            vul.append(clause)
        elif clause.head.predicate == "bugHyp":
            bug.append(clause)
        else:
            topology.append(clause)
    return topology, vul, bug


def external_chain():
    return _split(EXTERNAL_CHAIN_FACTS)


def hypothesis_fanout():
    return _split(HYPOTHESIS_FANOUT_FACTS)


def external_chain_ag(ruleset: str = "combined"):
    from firmgraph.attackgraph import generate_ag

    topo, vul, bug = external_chain()
    return generate_ag(topo, vul, bug, get_ruleset(ruleset))


def hypothesis_fanout_ag(ruleset: str = "combined"):
    from firmgraph.attackgraph import generate_ag

    topo, vul, bug = hypothesis_fanout()
    return generate_ag(topo, vul, bug, get_ruleset(ruleset))


# ---------------------------------------------------------------------------
# Random firmware-style fixtures for what-if property tests
# ---------------------------------------------------------------------------


def random_firmware_facts(rng: random.Random):
    """Random topology + vulnerability facts. Cycles, diamonds, isolated
    binaries, and mixed severities are all fair game."""
    n = rng.randint(3, 10)
    names = [f"bin{i}" for i in range(n)]
    topology: list[str] = []
    for src in names:
        for dst in names:
            if src != dst and rng.random() < 0.22:
                flow = rng.choice(["socket", "exec", "environment", "file"])
                topology.append(f"dataFlow({src}, {dst}, '{flow}').")
    for name in rng.sample(names, k=rng.randint(0, max(1, n // 3))):
        topology.append(f"externalInteraction('Internet', {name}, internet).")

    vul: list[str] = []
    cve_no = 1000
    for name in names:
        for _ in range(rng.randint(0, 2)):
            severity = rng.choice(["CRITICAL", "HIGH", "MEDIUM", "LOW"])
            vector = rng.choice(["NETWORK", "NETWORK", "NETWORK", "LOCAL"])
            cve_no += 1
            vul.append(
                f"vulExists('CVE-2024-{cve_no}', {name}, '{vector}', "
                f"'availability_loss', '{severity}')."
            )
    bug: list[str] = []
    for name in rng.sample(names, k=rng.randint(0, max(1, n // 4))):
        bug.append(f"bugHyp({name}, 'LOCAL', 'Undefined').")

    return _split("\n".join(topology + vul + bug)), names
