"""Bipartite matching (augmenting paths) with Hall deficiency witnesses."""

from __future__ import annotations


def hall_matching(men, women, knows):
    """Match every woman to a distinct man she knows, or exhibit a violator.

    `knows` maps each woman to an iterable of men.  Returns
    ('matching', {woman: man}) when a saturating matching exists, otherwise
    ('deficient', set_of_women) with |N(set)| < |set|.
    """
    men = list(men)
    women = list(women)
    adj = {w: [m for m in knows[w]] for w in women}
    match_of_man = {}
    match_of_woman = {}

    def augment(w, visited_men):
        for m in adj[w]:
            if m in visited_men:
                continue
            visited_men.add(m)
            if m not in match_of_man or augment(match_of_man[m], visited_men):
                match_of_man[m] = w
                match_of_woman[w] = m
                return True
        return False

    for w in women:
        visited = set()
        if not augment(w, visited):
            # violator: w plus every woman matched to a visited man
            bad = {w} | {match_of_man[m] for m in visited
                         if m in match_of_man}
            neigh = set()
            for wv in bad:
                neigh.update(adj[wv])
            if len(neigh) >= len(bad):
                raise AssertionError("deficiency witness failed Hall check")
            return "deficient", bad
    return "matching", match_of_woman


def matching_exists_brute(women_masks, n_men) -> bool:
    """Hall-condition oracle: every subset of women knows enough men."""
    k = len(women_masks)
    for sub in range(1, 1 << k):
        union = 0
        size = 0
        s = sub
        i = 0
        while s:
            if s & 1:
                union |= women_masks[i]
                size += 1
            s >>= 1
            i += 1
        if bin(union).count("1") < size:
            return False
    return True
