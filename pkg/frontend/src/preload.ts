export type ImageLoader = (url: string) => Promise<unknown>;

/** Load every stimulus before the trial starts; flicker must never wait on
 * the network. Rejects on the first failing asset. */
export async function preloadAll(urls: string[], loader: ImageLoader): Promise<void> {
  await Promise.all(urls.map((url) => loader(url)));
}

export const browserImageLoader: ImageLoader = (url) =>
  new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error(`failed to preload ${url}`));
    img.src = url;
  });
