"""senscommon: corpus mining, crowd annotation and classifiers for
sense-perception commonsense relations (sound-source, sound-scene,
smell-sentiment)."""

__version__ = "0.1.0"
