// Trailing rate limiter: during continuous calls the wrapped function fires
// at most once per interval, always with the latest arguments. With a
// 100 ms interval a slider drag emits at most 10 requests per second.

export interface RateLimited<A extends unknown[]> {
    (...args: A): void;
    cancel(): void;
}

export function rateLimit<A extends unknown[]>(
    fn: (...args: A) => void,
    intervalMs: number,
): RateLimited<A> {
    let timer: ReturnType<typeof setTimeout> | null = null;
    let queued: A | null = null;

    const fire = () => {
        if (queued === null) {
            timer = null;
            return;
        }
        const args = queued;
        queued = null;
        timer = setTimeout(fire, intervalMs);
        fn(...args);
    };

    const limited = (...args: A) => {
        queued = args;
        if (timer === null) {
            timer = setTimeout(fire, intervalMs);
        }
    };
    limited.cancel = () => {
        if (timer !== null) clearTimeout(timer);
        timer = null;
        queued = null;
    };
    return limited;
}
