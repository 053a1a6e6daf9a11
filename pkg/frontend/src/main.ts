// DOM wiring: two controls-less players, one shared Play/Pause Both
// button, the rating prompt, and the two choice buttons.

import { HttpStudyApi } from './api.js'
import { PairController, type PairView, type Player } from './controller.js'

class VideoPlayer implements Player {
  private readyCb: (() => void) | null = null

  constructor(private readonly el: HTMLVideoElement) {
    this.el.addEventListener('canplaythrough', () => {
      if (this.readyCb) {
        const cb = this.readyCb
        this.readyCb = null
        cb()
      }
    })
  }

  load(url: string): void {
    this.el.src = url
    this.el.load()
  }

  play(): void {
    void this.el.play().catch(() => {})
  }

  pause(): void {
    this.el.pause()
  }

  onReady(cb: () => void): void {
    this.readyCb = cb
  }

  onEnded(cb: () => void): void {
    this.el.addEventListener('ended', cb)
  }

  rewind(): void {
    this.el.currentTime = 0
  }
}

function sessionToken(): string {
  const key = 'headeval-session'
  let token = window.localStorage.getItem(key)
  if (!token) {
    token = crypto.randomUUID()
    window.localStorage.setItem(key, token)
  }
  return token
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

export function boot(): void {
  const leftVideo = el<HTMLVideoElement>('left-video')
  const rightVideo = el<HTMLVideoElement>('right-video')
  const playButton = el<HTMLButtonElement>('play-both')
  const leftButton = el<HTMLButtonElement>('choose-left')
  const rightButton = el<HTMLButtonElement>('choose-right')
  const retryButton = el<HTMLButtonElement>('retry')
  const status = el<HTMLParagraphElement>('status')

  const left = new VideoPlayer(leftVideo)
  const right = new VideoPlayer(rightVideo)

  const render = (view: PairView): void => {
    const busy = view.phase === 'loading' || view.phase === 'submitting'
    leftButton.disabled = !view.canVote
    rightButton.disabled = !view.canVote
    playButton.disabled = view.phase !== 'ready'
    playButton.textContent = view.playing ? 'Pause Both' : 'Play Both'
    retryButton.hidden = view.phase !== 'error'
    if (view.phase === 'error') {
      status.textContent = 'Could not reach the study service. Try again.'
    } else {
      status.textContent = busy ? 'Loading the next pair…' : ''
    }
  }

  const controller = new PairController(
    new HttpStudyApi(),
    left,
    right,
    sessionToken(),
    render,
  )

  playButton.addEventListener('click', () => controller.togglePlayPause())
  leftButton.addEventListener('click', () => void controller.voteFor('left'))
  rightButton.addEventListener('click', () => void controller.voteFor('right'))
  retryButton.addEventListener('click', () => void controller.retry())

  // When a clip runs out, both rewind and replay together.
  const replay = (): void => {
    left.rewind()
    right.rewind()
    controller.replayBoth()
  }
  left.onEnded(replay)
  right.onEnded(() => {})

  void controller.nextPair()
}

if (typeof document !== 'undefined' && document.getElementById('left-video')) {
  boot()
}
