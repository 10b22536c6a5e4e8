"""Exact subquadratic-decision-tree toolkit for red-blue intersection counting in triangles."""
