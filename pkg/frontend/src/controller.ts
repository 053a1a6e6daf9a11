// Pair-view state machine, independent of the DOM.
//
// Guarantees the study's integrity rules no matter how the UI layer is
// driven: voting stays disabled until both players are ready, each pair
// accepts exactly one submission (double-clicks and races included), a
// stale rejection from the service recovers by fetching a fresh pair, and
// the view never carries anything that could identify a method.

import type { Choice, PairPayload, StudyApi } from './api.js'

export interface Player {
  load(url: string): void
  play(): void
  pause(): void
  /** Registered before load; fired once the media can play through. */
  onReady(cb: () => void): void
}

export type Phase = 'idle' | 'loading' | 'ready' | 'submitting' | 'error'

export interface PairView {
  pairId: string | null
  phase: Phase
  playing: boolean
  submitted: boolean
  canVote: boolean
  error: string | null
}

export interface SessionStats {
  pairsShown: number
  votesAccepted: number
  duplicatesBlocked: number
  staleRecoveries: number
}

export type VoteResult = 'accepted' | 'blocked' | 'recovered' | 'failed'

export class PairController {
  private phase: Phase = 'idle'
  private pair: PairPayload | null = null
  private playing = false
  private submitted = false
  private inFlight = false
  private lastError: string | null = null
  readonly stats: SessionStats = {
    pairsShown: 0,
    votesAccepted: 0,
    duplicatesBlocked: 0,
    staleRecoveries: 0,
  }

  constructor(
    private readonly api: StudyApi,
    private readonly left: Player,
    private readonly right: Player,
    private readonly sessionId: string,
    private readonly onChange: (view: PairView) => void = () => {},
  ) {}

  get view(): PairView {
    return {
      pairId: this.pair ? this.pair.pair_id : null,
      phase: this.phase,
      playing: this.playing,
      submitted: this.submitted,
      canVote: this.phase === 'ready' && !this.submitted,
      error: this.lastError,
    }
  }

  private emit(): void {
    this.onChange(this.view)
  }

  /** Fetch the next pair and hold until both players report ready. */
  async nextPair(): Promise<void> {
    this.phase = 'loading'
    this.pair = null
    this.submitted = false
    this.playing = false
    this.lastError = null
    this.emit()

    let payload: PairPayload
    try {
      payload = await this.api.fetchPair()
    } catch (err) {
      this.phase = 'error'
      this.lastError = String(err)
      this.emit()
      return
    }

    const bothReady = new Promise<void>((resolve) => {
      let readyCount = 0
      const arm = (player: Player) =>
        player.onReady(() => {
          readyCount += 1
          if (readyCount === 2) resolve()
        })
      arm(this.left)
      arm(this.right)
    })
    this.pair = payload
    this.left.load(payload.left_url)
    this.right.load(payload.right_url)
    await bothReady

    this.phase = 'ready'
    this.stats.pairsShown += 1
    this.emit()
  }

  /** One control drives both players so they never diverge. */
  togglePlayPause(): void {
    if (this.phase !== 'ready') return
    if (this.playing) {
      this.left.pause()
      this.right.pause()
    } else {
      this.left.play()
      this.right.play()
    }
    this.playing = !this.playing
    this.emit()
  }

  /** Restart both players together (used when a clip runs out). */
  replayBoth(): void {
    if (this.phase !== 'ready' || !this.playing) return
    this.left.play()
    this.right.play()
  }

  /**
   * Cast the vote for one side. Exactly one submission can win per pair;
   * every later call reports 'blocked' without touching the network.
   */
  async voteFor(choice: Choice): Promise<VoteResult> {
    if (this.phase !== 'ready' || this.submitted || this.inFlight || !this.pair) {
      this.stats.duplicatesBlocked += 1
      return 'blocked'
    }
    this.inFlight = true
    this.phase = 'submitting'
    this.left.pause()
    this.right.pause()
    this.playing = false
    this.emit()

    const outcome = await this.api.submitVote(this.pair.pair_id, choice, this.sessionId)
    this.inFlight = false
    if (outcome.kind === 'accepted') {
      this.submitted = true
      this.stats.votesAccepted += 1
      await this.nextPair()
      return 'accepted'
    }
    if (outcome.kind === 'stale') {
      // The pair expired or was already voted: never double-count, move on.
      this.stats.staleRecoveries += 1
      await this.nextPair()
      return 'recovered'
    }
    this.phase = 'error'
    this.lastError = outcome.detail
    this.emit()
    return 'failed'
  }

  /** Leave the error state by fetching a fresh pair. */
  async retry(): Promise<void> {
    if (this.phase !== 'error') return
    await this.nextPair()
  }
}
