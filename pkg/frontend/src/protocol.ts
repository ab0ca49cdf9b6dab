// Command bookkeeping over the WebSocket: sequence numbers, pending acks,
// and command outcomes surfaced to the view model.

export interface SocketLike {
  send(data: string): void;
}

export interface CommandOutcome {
  seq: number;
  ok: boolean;
  message?: string;
}

export class CommandClient {
  private nextSeq = 1;
  private pending = new Map<number, string>();
  readonly outcomes: CommandOutcome[] = [];

  constructor(private readonly socket: SocketLike) {}

  send(type: string, payload: Record<string, unknown> = {}): number {
    const seq = this.nextSeq++;
    this.pending.set(seq, type);
    this.socket.send(JSON.stringify({ type, seq, ...payload }));
    return seq;
  }

  hasPending(): boolean {
    return this.pending.size > 0;
  }

  pendingCount(): number {
    return this.pending.size;
  }

  // Feed ack/error replies back; returns the outcome when it closed a command.
  handleReply(msg: { type: string; seq: number | null; message?: string }):
      CommandOutcome | null {
    if (msg.seq === null || msg.seq === undefined || !this.pending.has(msg.seq)) {
      return null;
    }
    this.pending.delete(msg.seq);
    const outcome = {
      seq: msg.seq,
      ok: msg.type === "ack",
      message: msg.message,
    };
    this.outcomes.push(outcome);
    return outcome;
  }
}
