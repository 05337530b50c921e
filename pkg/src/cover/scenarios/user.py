USER_SCENARIOS = {}
