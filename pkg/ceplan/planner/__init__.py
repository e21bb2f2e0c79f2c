# -*- coding: utf-8 -*-
"""
planner: day-ahead, real-time and long-term cost-efficiency agents.
"""
