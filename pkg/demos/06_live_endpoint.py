"""One live call against an OpenAI-compatible endpoint.

Needs PERSONA_LAB_API_KEY; PERSONA_LAB_BASE_URL optionally points at another
compatible server. Without a key the script explains what is missing and exits.

Run: PERSONA_LAB_API_KEY=... python demos/06_live_endpoint.py
"""
import os
import sys

from persona_lab.backend import ChatMessage, GenerationRequest, LiveBackend, Role
from persona_lab.errors import BackendUnavailable
from persona_lab.persona import builtin_profiles

creative = builtin_profiles()[0]
try:
    backend = LiveBackend(base_url=os.environ.get("PERSONA_LAB_BASE_URL", "https://api.openai.com/v1"))
except BackendUnavailable as exc:
    sys.exit(f"skipping: {exc}")

request = GenerationRequest((
    ChatMessage(Role.SYSTEM, creative.system_prompt),
    ChatMessage(Role.USER, "Describe your ideal weekend in two sentences."),
), temperature=0.7, max_tokens=120, agent_id="demo", sequence=0)
try:
    print(backend.generate(request).text)
except BackendUnavailable as exc:
    sys.exit(f"endpoint unavailable: {exc}")
finally:
    backend.close()
