import { ApiClient } from "./api";
import { SessionState } from "./state";

/** Everything a panel needs: the client, session state, and app hooks. */
export interface Ctx {
  api: ApiClient;
  state: SessionState;
  showError(err: unknown): void;
  /** Re-render data panels after a mutation bumped the revision. */
  refresh(): void | Promise<void>;
}
