"""Language profile registry.

Profiles are shipped as an editable YAML file (one document per language)
and can be overridden by pointing the loader at a different path.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import yaml

from .model import LanguageProfile

DEFAULT_PROFILES_RESOURCE = "profiles.yaml"


def _profile_from_doc(doc: dict) -> LanguageProfile:
    return LanguageProfile(
        code=doc["code"],
        terminators=frozenset(doc.get("terminators", ["?"])),
        exclusion_phrases=tuple(doc.get("exclusion_phrases", [])),
        stopwords=tuple(doc.get("stopwords", [])),
        tokenizer_id=doc.get("tokenizer_id", "whitespace"),
        segmenter_id=doc.get("segmenter_id", "rule"),
        calendar_offset_years=doc.get("calendar_offset_years", 0),
    )


class ProfileRegistry:
    def __init__(self, profiles: dict[str, LanguageProfile]):
        self._profiles = profiles

    def __contains__(self, code: str) -> bool:
        return code in self._profiles

    def __len__(self) -> int:
        return len(self._profiles)

    def get(self, code: str) -> LanguageProfile:
        try:
            return self._profiles[code]
        except KeyError:
            raise KeyError(f"no language profile for {code!r}") from None

    def codes(self) -> list[str]:
        return sorted(self._profiles)

    @classmethod
    def from_file(cls, path: str | Path) -> "ProfileRegistry":
        text = Path(path).read_text(encoding="utf-8")
        return cls.from_yaml(text)

    @classmethod
    def from_yaml(cls, text: str) -> "ProfileRegistry":
        profiles: dict[str, LanguageProfile] = {}
        for doc in yaml.safe_load_all(text):
            if not doc:
                continue
            profile = _profile_from_doc(doc)
            if profile.code in profiles:
                raise ValueError(f"duplicate profile for {profile.code!r}")
            profiles[profile.code] = profile
        if not profiles:
            raise ValueError("profile file contains no languages")
        return cls(profiles)

    @classmethod
    def default(cls) -> "ProfileRegistry":
        text = resources.files("nfqa.data").joinpath(DEFAULT_PROFILES_RESOURCE).read_text("utf-8")
        return cls.from_yaml(text)
