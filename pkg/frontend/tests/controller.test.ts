import { describe, expect, it } from 'vitest'

import type { Choice, PairPayload, StudyApi, VoteOutcome } from '../src/api.js'
import { PairController, type Player } from '../src/controller.js'

class FakePlayer implements Player {
  loadedUrl: string | null = null
  playingNow = false
  playCalls = 0
  private readyCb: (() => void) | null = null
  constructor(private readonly autoReady = true) {}

  load(url: string): void {
    this.loadedUrl = url
    if (this.autoReady && this.readyCb) {
      const cb = this.readyCb
      this.readyCb = null
      queueMicrotask(cb)
    }
  }

  play(): void {
    this.playingNow = true
    this.playCalls += 1
  }

  pause(): void {
    this.playingNow = false
  }

  onReady(cb: () => void): void {
    this.readyCb = cb
  }

  fireReady(): void {
    if (this.readyCb) {
      const cb = this.readyCb
      this.readyCb = null
      cb()
    }
  }
}

class FakeApi implements StudyApi {
  issued = 0
  votes: Array<{ pairId: string; choice: Choice }> = []
  voted = new Set<string>()
  failFetches = 0
  nextVoteOutcome: VoteOutcome | null = null
  voteDelay: Promise<void> | null = null

  async fetchPair(): Promise<PairPayload> {
    if (this.failFetches > 0) {
      this.failFetches -= 1
      throw new Error('network down')
    }
    this.issued += 1
    const id = `pair-${this.issued}`
    return {
      pair_id: id,
      video_id: 'clip',
      left_url: `/media/${id}/left`,
      right_url: `/media/${id}/right`,
    }
  }

  async submitVote(pairId: string, choice: Choice): Promise<VoteOutcome> {
    if (this.voteDelay) await this.voteDelay
    if (this.nextVoteOutcome) {
      const outcome = this.nextVoteOutcome
      this.nextVoteOutcome = null
      return outcome
    }
    if (this.voted.has(pairId)) return { kind: 'stale' }
    this.voted.add(pairId)
    this.votes.push({ pairId, choice })
    return { kind: 'accepted' }
  }
}

function setup(options: { autoReady?: boolean } = {}) {
  const api = new FakeApi()
  const left = new FakePlayer(options.autoReady ?? true)
  const right = new FakePlayer(options.autoReady ?? true)
  const controller = new PairController(api, left, right, 'session-1')
  return { api, left, right, controller }
}

describe('pair loading', () => {
  it('disables voting until both players are ready', async () => {
    const { controller, left, right } = setup({ autoReady: false })
    const loading = controller.nextPair()
    await new Promise((resolve) => setTimeout(resolve, 0))  // let the fetch settle
    expect(controller.view.canVote).toBe(false)

    left.fireReady()
    expect(controller.view.canVote).toBe(false)

    right.fireReady()
    await loading
    expect(controller.view.phase).toBe('ready')
    expect(controller.view.canVote).toBe(true)
  })

  it('loads opaque media urls into both players', async () => {
    const { controller, left, right } = setup()
    await controller.nextPair()
    expect(left.loadedUrl).toMatch(/\/media\/pair-1\/left$/)
    expect(right.loadedUrl).toMatch(/\/media\/pair-1\/right$/)
  })

  it('exposes no method identities anywhere in the view', async () => {
    const { controller } = setup()
    await controller.nextPair()
    const serialized = JSON.stringify(controller.view)
    expect(serialized).not.toMatch(/method/i)
    expect(serialized).not.toMatch(/ground/i)
  })

  it('fetch failure lands in the error state and retry recovers', async () => {
    const { controller, api } = setup()
    api.failFetches = 1
    await controller.nextPair()
    expect(controller.view.phase).toBe('error')
    expect(controller.view.error).toMatch(/network down/)

    await controller.retry()
    expect(controller.view.phase).toBe('ready')
  })
})

describe('shared playback control', () => {
  it('one toggle drives both players', async () => {
    const { controller, left, right } = setup()
    await controller.nextPair()
    controller.togglePlayPause()
    expect(left.playingNow && right.playingNow).toBe(true)
    controller.togglePlayPause()
    expect(left.playingNow || right.playingNow).toBe(false)
  })

  it('ignores playback before the pair is ready', () => {
    const { controller, left } = setup({ autoReady: false })
    controller.togglePlayPause()
    expect(left.playingNow).toBe(false)
  })
})

describe('voting', () => {
  it('posts exactly one vote and advances to the next pair', async () => {
    const { controller, api } = setup()
    await controller.nextPair()
    const result = await controller.voteFor('left')
    expect(result).toBe('accepted')
    expect(api.votes).toEqual([{ pairId: 'pair-1', choice: 'left' }])
    expect(controller.view.pairId).toBe('pair-2')
  })

  it('a double click produces a single network submission', async () => {
    const { controller, api } = setup()
    await controller.nextPair()
    api.voteDelay = new Promise((resolve) => setTimeout(resolve, 5))
    const [first, second] = await Promise.all([
      controller.voteFor('left'),
      controller.voteFor('left'),
    ])
    expect([first, second].sort()).toEqual(['accepted', 'blocked'])
    expect(api.votes).toHaveLength(1)
    expect(controller.stats.duplicatesBlocked).toBe(1)
  })

  it('voting before readiness is blocked', () => {
    const { controller } = setup({ autoReady: false })
    void controller.nextPair()
    return controller.voteFor('right').then((result) => {
      expect(result).toBe('blocked')
    })
  })

  it('a stale rejection recovers with a fresh pair and no double count', async () => {
    const { controller, api } = setup()
    await controller.nextPair()
    api.nextVoteOutcome = { kind: 'stale' }
    const result = await controller.voteFor('right')
    expect(result).toBe('recovered')
    expect(api.votes).toHaveLength(0)
    expect(controller.stats.staleRecoveries).toBe(1)
    expect(controller.view.pairId).toBe('pair-2')
    expect(controller.view.canVote).toBe(true)
  })

  it('a hard failure surfaces the error state', async () => {
    const { controller, api } = setup()
    await controller.nextPair()
    api.nextVoteOutcome = { kind: 'failed', detail: 'HTTP 500' }
    const result = await controller.voteFor('left')
    expect(result).toBe('failed')
    expect(controller.view.phase).toBe('error')
  })

  it('fifty sequential cycles never duplicate a pair or a vote', async () => {
    const { controller, api } = setup()
    await controller.nextPair()
    const seen = new Set<string>()
    for (let i = 0; i < 50; i += 1) {
      const pairId = controller.view.pairId
      expect(pairId).not.toBeNull()
      expect(seen.has(pairId as string)).toBe(false)
      seen.add(pairId as string)
      const result = await controller.voteFor(i % 2 === 0 ? 'left' : 'right')
      expect(result).toBe('accepted')
    }
    expect(api.votes).toHaveLength(50)
    expect(new Set(api.votes.map((v) => v.pairId)).size).toBe(50)
    expect(controller.stats.votesAccepted).toBe(50)
  })
})
