"""Flight stack and arena simulator for balloon hunting and target chasing."""
