"""Cluster-aware multicast forwarding over RPL DODAGs, with ESMRF/BMRF baselines."""
