// Poll-based updates: the sessions are turn-based, so a simple
// GET log?since=lastSeq loop keeps the view current.

import { ApiClient, ApiError } from "./api.js";
import type { SessionViewModel } from "./session_view.js";

/**
 * Fetch entries after the view's last seq and append them in order.
 * Repeating a poll is a no-op; a 404 marks the session ended; any other
 * failure flips the view into the retry state without touching entries.
 * Returns the number of entries appended.
 */
export async function pollUpdates(client: ApiClient, view: SessionViewModel): Promise<number> {
  try {
    const entries = await client.getLog(view.sessionId, view.lastSeq);
    const appended = view.applyEntries(entries);
    view.connection = "ok";
    return appended;
  } catch (error) {
    view.connection = error instanceof ApiError && error.status === 404 ? "ended" : "retry";
    return 0;
  }
}
