"""EcNet: dual-branch recurrent + attention anomaly detector for IoT network flows."""
