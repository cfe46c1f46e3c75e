# Marker file so tests can be imported as a package if needed.
