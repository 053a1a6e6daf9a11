// Typed client for the study service HTTP API.

export type Choice = 'left' | 'right'

export interface PairPayload {
  pair_id: string
  video_id: string
  left_url: string
  right_url: string
}

export type VoteOutcome =
  | { kind: 'accepted' }
  | { kind: 'stale' }      // 404/409: pair unknown, expired, or already voted
  | { kind: 'failed'; detail: string }

export interface StudyApi {
  fetchPair(): Promise<PairPayload>
  submitVote(pairId: string, choice: Choice, sessionId: string): Promise<VoteOutcome>
}

export class HttpStudyApi implements StudyApi {
  constructor(private readonly baseUrl: string = '') {}

  async fetchPair(): Promise<PairPayload> {
    const resp = await fetch(`${this.baseUrl}/api/pair`)
    if (!resp.ok) {
      throw new Error(`pair fetch failed: HTTP ${resp.status}`)
    }
    const payload = (await resp.json()) as PairPayload
    if (!payload.pair_id || !payload.left_url || !payload.right_url) {
      throw new Error('pair payload incomplete')
    }
    return payload
  }

  async submitVote(pairId: string, choice: Choice, sessionId: string): Promise<VoteOutcome> {
    let resp: Response
    try {
      resp = await fetch(`${this.baseUrl}/api/vote`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ pair_id: pairId, choice, session_id: sessionId }),
      })
    } catch (err) {
      return { kind: 'failed', detail: String(err) }
    }
    if (resp.ok) return { kind: 'accepted' }
    if (resp.status === 404 || resp.status === 409) return { kind: 'stale' }
    return { kind: 'failed', detail: `HTTP ${resp.status}` }
  }
}
