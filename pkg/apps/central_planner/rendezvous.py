"""
Rendezvous Time
"""


def rendezvous_time(t_b, t_cur, t_e, last_arrivals=()):
    """
    T_c = T_e + max(T_b + T_cur, max_k(T_l^k + T_m(P_l^k, P_c))).

    last_arrivals: one T_l^k + T_m(P_l^k, P_c) value per robot still bound to a
    previous mission.
    """
    latest = t_b + t_cur
    for arrival in last_arrivals:
        latest = max(latest, arrival)
    return t_e + latest


def last_arrivals(last_missions, p_c, motion_cost):
    """T_l + T_m(P_l, P_c) for each (P_l, T_l) pair."""
    return [t_l + motion_cost(p_l, p_c) for p_l, t_l in last_missions]
