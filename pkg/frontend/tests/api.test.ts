import { describe, expect, it, vi } from 'vitest';

import { ApiError, ReviewApi } from '../src/api';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

describe('ReviewApi', () => {
  it('returns parsed payloads on success', async () => {
    const fetchImpl = vi.fn().mockResolvedValue(jsonResponse(200, { projects: ['a', 'b'] }));
    const api = new ReviewApi('http://svc', fetchImpl);
    await expect(api.listProjects()).resolves.toEqual({ projects: ['a', 'b'] });
    expect(fetchImpl).toHaveBeenCalledWith(
      'http://svc/projects',
      expect.objectContaining({ method: 'GET' }),
    );
  });

  it('maps error payloads to ApiError with the service code', async () => {
    const fetchImpl = vi
      .fn()
      .mockResolvedValue(jsonResponse(409, { code: 'gated', message: 'open gate' }));
    const api = new ReviewApi('', fetchImpl);
    const err = await api.advance('p1').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe('gated');
    expect(err.httpStatus).toBe(409);
    expect(err.message).toBe('open gate');
  });

  it('treats a 404 gate as "no gate open"', async () => {
    const fetchImpl = vi
      .fn()
      .mockResolvedValue(jsonResponse(404, { code: 'no_open_gate', message: 'none' }));
    const api = new ReviewApi('', fetchImpl);
    await expect(api.getGate('p1')).resolves.toBeNull();
  });

  it('sends decisions as JSON bodies', async () => {
    const fetchImpl = vi
      .fn()
      .mockResolvedValue(jsonResponse(200, { outcome: 'Exited', status: 'Terminated' }));
    const api = new ReviewApi('', fetchImpl);
    await api.decide('p1', { decision: 'terminate', rationale: 'too risky', decider: 'rae' });
    const [url, init] = fetchImpl.mock.calls[0];
    expect(url).toBe('/projects/p1/gate/decision');
    expect(JSON.parse(init.body as string)).toEqual({
      decision: 'terminate',
      rationale: 'too risky',
      decider: 'rae',
    });
  });

  it('encodes project ids in paths', async () => {
    const fetchImpl = vi.fn().mockResolvedValue(jsonResponse(200, { bias_history: [] }));
    const api = new ReviewApi('', fetchImpl);
    await api.getBiasHistory('a b/c');
    expect(fetchImpl.mock.calls[0][0]).toBe('/projects/a%20b%2Fc/bias-history');
  });
});
