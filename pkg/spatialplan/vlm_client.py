"""
远程规划器客户端
"""
import asyncio
import logging
from typing import Optional, Protocol, Sequence, runtime_checkable

import httpx
from llama_index.llms.ollama import Ollama

from config.settings import settings
from models.env import TaskId
from models.errors import OracleReplyError, OracleTransportError, PlanValidationError, RemoteOracleError
from models.plan import PlanTable
from spatialplan.grammar import parse_plan
from spatialplan.oracle import compute_offset
from spatialplan.prompts import render_plan_prompt

logger = logging.getLogger(__name__)


@runtime_checkable
class PlanOracleClient(Protocol):
    """远程文本补全接口"""

    async def complete(self, prompt: str) -> str:
        ...


class OllamaOracleClient:
    """通过 llama-index Ollama 调用本地模型"""

    def __init__(self, model: Optional[str] = None, base_url: Optional[str] = None,
                 timeout: Optional[float] = None):
        self.model = model or settings.VLM_MODEL
        self.base_url = base_url or settings.VLM_BASE_URL
        self.llm = Ollama(
            model=self.model,
            base_url=self.base_url,
            request_timeout=timeout or settings.VLM_TIMEOUT,
            temperature=0.0,
            context_window=4096,
        )
        self._lock = asyncio.Lock()

    async def complete(self, prompt: str) -> str:
        async with self._lock:
            try:
                response = await self.llm.acomplete(prompt)
            except (httpx.HTTPError, ConnectionError, asyncio.TimeoutError) as e:
                raise OracleTransportError(f"Ollama 调用失败: {e}") from e
        return response.text


class HttpOracleClient:
    """HTTP 规划器：POST JSON {prompt, model}，回复为纯文本规划块"""

    def __init__(self, endpoint: Optional[str] = None, model: Optional[str] = None,
                 timeout: Optional[float] = None, transport: Optional[httpx.AsyncBaseTransport] = None):
        self.endpoint = endpoint or settings.VLM_BASE_URL
        self.model = model or settings.VLM_MODEL
        self.timeout = timeout or settings.VLM_TIMEOUT
        self._transport = transport
        self._lock = asyncio.Lock()

    async def complete(self, prompt: str) -> str:
        async with self._lock:
            try:
                async with httpx.AsyncClient(timeout=self.timeout, transport=self._transport) as client:
                    response = await client.post(self.endpoint, json={"prompt": prompt, "model": self.model})
                    response.raise_for_status()
            except httpx.HTTPError as e:
                raise OracleTransportError(f"HTTP 规划器调用失败: {e}") from e
        return response.text


async def complete_with_retry(client: PlanOracleClient, prompt: str, max_attempts: Optional[int] = None) -> str:
    """传输失败时重试，总尝试次数不超过 max_attempts"""
    attempts = max_attempts or settings.VLM_MAX_ATTEMPTS
    last_error: Optional[Exception] = None
    for attempt in range(1, attempts + 1):
        try:
            return await client.complete(prompt)
        except OracleTransportError as e:
            last_error = e
            logger.warning(f"⚠️ 远程调用失败 (第 {attempt}/{attempts} 次): {e}")
    raise RemoteOracleError(f"远程调用在 {attempts} 次尝试后仍失败: {last_error}")


async def vlm_generate_plan(client: PlanOracleClient, delta_p: Sequence[float], task_id,
                            max_attempts: Optional[int] = None) -> PlanTable:
    """向远程规划器请求规划表并解析回复"""
    task = TaskId.parse(task_id)
    offset = compute_offset((0.0, 0.0, 0.0), delta_p)
    prompt = render_plan_prompt(offset, task.value)
    reply = await complete_with_retry(client, prompt, max_attempts)
    try:
        plan = parse_plan(reply)
    except PlanValidationError as e:
        raise OracleReplyError(f"规划器回复无法解析: {e}", reply) from e
    logger.info(f"✅ 远程规划器返回 {len(plan)} 个子目标")
    return plan
