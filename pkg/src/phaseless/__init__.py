"""Multi-window STFT phase retrieval on lattice samples of Hermite signals."""
