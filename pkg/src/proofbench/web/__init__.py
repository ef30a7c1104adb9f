"""HTTP + realtime interface over the platform."""
