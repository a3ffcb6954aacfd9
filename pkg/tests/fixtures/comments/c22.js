var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var fc = ee.FeatureCollection('F') /* first */ /* second */ .limit(5);
// standalone comment 58
print(typeof /x/.source); // regex after keyword

var r2 = /[/]+/.test('a//b');
// standalone comment 52
var m = s.replace(/\/\//g, '/'); // escaped slashes
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
// standalone comment 83
var re = /\/\*.*?\*\//g; // regex with comment delimiters
var re = /\/\*.*?\*\//g; // regex with comment delimiters

var m = s.replace(/\/\//g, '/'); // escaped slashes
if (x) { /* empty */ } else { print('a/*b*/c'); }
